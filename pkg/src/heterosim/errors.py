"""Exception types shared across the package."""


class HeterosimError(Exception):
    """Base class for errors raised by this package."""


class BlowupError(HeterosimError):
    """Time integration produced NaN or Inf."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class FieldBoundsError(HeterosimError):
    """A simulated field left its admissible range; we abort rather than clip."""

    def __init__(self, message: str, time: float, field_min: float, field_max: float):
        super().__init__(message)
        self.time = time
        self.field_min = field_min
        self.field_max = field_max


class NoSteadyStateError(HeterosimError):
    """Steady-state iteration did not converge; carries the best residual seen."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


class NoFrontError(HeterosimError):
    """A front position was requested but the field never crosses the level."""


class InsufficientDataError(HeterosimError):
    """Not enough samples to run a classification."""


class ConfigError(HeterosimError):
    """Configuration text failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if key is not None:
            parts.append(f"key '{key}'")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.key = key


class PresetError(HeterosimError):
    """A preset refused to run because its precondition failed."""
