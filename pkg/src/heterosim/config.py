"""Run configuration: INI-style parsing, validation, defaults, round-tripping.

A configuration is a flat set of sectioned ``key = value`` lines.  Every key
is validated against a known schema with per-model defaults; unknown keys or
out-of-range values are parse errors that name the offending line and key.
The serialized form of a parsed config parses back to an identical config,
and a run's manifest embeds it so any artifact can be regenerated.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields
from typing import Callable

from .errors import ConfigError

MODELS = ("GrassForest", "SL4", "Areal")
BOUNDARY_NAMES = ("reflecting", "open", "periodic")
IC_KINDS = ("uniform", "ramp", "seed", "random", "equilibrium")


@dataclass
class RunConfig:
    """Fully resolved run description; every field has a validated value."""

    model: str = "GrassForest"
    seed: int = 0
    out_dir: str = "runs"
    # grid
    x_min: float = 0.0
    x_max: float | None = None     # 1.0 for SL models, 40.0 for Areal
    n_nodes: int = 400
    # kernels / boundary (SL models)
    sigma_w: float | None = None
    sigma_f: float | None = None
    sigma_t: float | None = None
    bc: str = "reflecting"
    # vegetation parameters
    mu: float = 0.1
    nu: float = 0.05
    omega_lo: float = 0.9
    omega_hi: float = 0.4
    omega_threshold: float = 0.4
    omega_steepness: float = 0.01
    phi_lo: float = 0.1
    phi_hi: float = 0.9
    phi_threshold: float = 0.4
    phi_steepness: float = 0.05
    # birth-rate gradient
    alpha_intercept: float = 0.5
    alpha_slope: float = 1.25
    beta_intercept: float = 0.15
    beta_slope: float = 0.1
    slope_parameter: float | None = None   # optional ramp profile on both gradients
    noise_amplitude: float = 0.0
    noise_seed: int = 0
    # arealization parameters
    k1: float = 2.0
    k2: float = 2.0
    chi1: float = 1.5
    chi2: float = 1.5
    saturation: float = 1.2
    d_e: float = 0.2
    d_ce: float = 0.2
    d_n: float = 0.2
    d_cn: float = 0.2
    rho_e_start: float = 0.20
    rho_n_start: float = 0.32
    rho_e_end: float = 0.32
    rho_n_end: float = 0.20
    ramp_lo: float = 8.0
    ramp_hi: float = 32.0
    # initial condition
    ic_kind: str = "uniform"
    ic_seed: int = 0
    ic_location: float = 0.95
    ic_width: float = 0.05
    ic_grass: float = 0.25
    ic_sapling: float = 0.25
    ic_tree: float = 0.25
    ic_forest: float = 0.25
    ic_noise: float = 1e-2
    # time stepping
    step: float | None = None      # 0.05 for SL models, 0.1 for Areal
    t_end: float = 200.0
    snapshot_stride: int = 50

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}",
                              key="model")
        if self.x_max is None:
            self.x_max = 40.0 if self.model == "Areal" else 1.0
        if self.step is None:
            self.step = 0.1 if self.model == "Areal" else 0.05
        default_sigma = 0.01 if self.model == "GrassForest" else 0.025
        if self.sigma_w is None:
            self.sigma_w = default_sigma
        if self.sigma_f is None:
            self.sigma_f = self.sigma_w
        if self.sigma_t is None:
            self.sigma_t = self.sigma_w
        self.validate()

    def validate(self):
        checks: list[tuple[bool, str, str]] = [
            (self.x_max > self.x_min, "x_max", "domain must have positive length"),
            (self.n_nodes >= 3, "n", "need at least 3 grid nodes"),
            (self.sigma_w > 0 and self.sigma_f > 0 and self.sigma_t > 0,
             "sigma", "kernel widths must be positive"),
            (self.bc in BOUNDARY_NAMES, "bc", f"boundary must be one of {BOUNDARY_NAMES}"),
            (self.mu >= 0, "mu", "sapling mortality must be nonnegative"),
            (self.nu >= 0, "nu", "tree mortality must be nonnegative"),
            (0 < self.omega_threshold < 1, "omega_threshold", "threshold must lie in (0,1)"),
            (0 < self.phi_threshold < 1, "phi_threshold", "threshold must lie in (0,1)"),
            (self.omega_steepness > 0, "omega_steepness", "steepness must be positive"),
            (self.phi_steepness > 0, "phi_steepness", "steepness must be positive"),
            (self.slope_parameter is None or self.slope_parameter >= 1,
             "slope_parameter", "slope parameter must be >= 1"),
            (self.noise_amplitude >= 0, "noise_amplitude", "noise amplitude must be >= 0"),
            (self.chi1 >= 0 and self.chi2 >= 0, "chi", "adhesion strengths must be >= 0"),
            (self.saturation > 0, "saturation", "saturation parameter must be positive"),
            (min(self.d_e, self.d_ce, self.d_n, self.d_cn) > 0,
             "d", "diffusivities must be positive"),
            (min(self.rho_e_start, self.rho_n_start, self.rho_e_end, self.rho_n_end) >= 0,
             "rho", "morphogen levels must be nonnegative"),
            (self.ramp_lo < self.ramp_hi, "ramp", "need ramp_lo < ramp_hi"),
            (self.ic_kind in IC_KINDS, "ic_kind", f"ic kind must be one of {IC_KINDS}"),
            (self.ic_noise >= 0, "ic_noise", "ic noise must be >= 0"),
            (0 < self.step <= (0.2 if self.model == "Areal" else 0.1),
             "step", "time step outside the scheme's stability envelope"),
            (self.t_end > 0, "t_end", "t_end must be positive"),
            (self.snapshot_stride >= 1, "snapshot_stride", "snapshot stride must be >= 1"),
            (self.seed >= 0 and self.ic_seed >= 0 and self.noise_seed >= 0,
             "seed", "seeds must be nonnegative"),
        ]
        for ok, key, message in checks:
            if not ok:
                raise ConfigError(message, key=key)


# section -> key -> (field name, parser)
def _float(s: str) -> float:
    return float(s)

def _int(s: str) -> int:
    return int(s)

def _str(s: str) -> str:
    return s

_SCHEMA: dict[str, dict[str, tuple[str, Callable]]] = {
    "run": {"model": ("model", _str), "seed": ("seed", _int), "out": ("out_dir", _str)},
    "grid": {"x_min": ("x_min", _float), "x_max": ("x_max", _float),
             "n": ("n_nodes", _int)},
    "kernels": {"sigma": ("sigma_w", _float), "sigma_w": ("sigma_w", _float),
                "sigma_f": ("sigma_f", _float), "sigma_t": ("sigma_t", _float),
                "bc": ("bc", _str)},
    "vegetation": {
        "mu": ("mu", _float), "nu": ("nu", _float),
        "omega_lo": ("omega_lo", _float), "omega_hi": ("omega_hi", _float),
        "omega_threshold": ("omega_threshold", _float),
        "omega_steepness": ("omega_steepness", _float),
        "phi_lo": ("phi_lo", _float), "phi_hi": ("phi_hi", _float),
        "phi_threshold": ("phi_threshold", _float),
        "phi_steepness": ("phi_steepness", _float),
    },
    "gradient": {
        "alpha_intercept": ("alpha_intercept", _float),
        "alpha_slope": ("alpha_slope", _float),
        "beta_intercept": ("beta_intercept", _float),
        "beta_slope": ("beta_slope", _float),
        "slope_parameter": ("slope_parameter", _float),
        "noise_amplitude": ("noise_amplitude", _float),
        "noise_seed": ("noise_seed", _int),
    },
    "arealization": {
        "k1": ("k1", _float), "k2": ("k2", _float),
        "chi1": ("chi1", _float), "chi2": ("chi2", _float),
        "saturation": ("saturation", _float),
        "d_e": ("d_e", _float), "d_ce": ("d_ce", _float),
        "d_n": ("d_n", _float), "d_cn": ("d_cn", _float),
        "rho_e_start": ("rho_e_start", _float), "rho_n_start": ("rho_n_start", _float),
        "rho_e_end": ("rho_e_end", _float), "rho_n_end": ("rho_n_end", _float),
        "ramp_lo": ("ramp_lo", _float), "ramp_hi": ("ramp_hi", _float),
    },
    "ic": {
        "kind": ("ic_kind", _str), "seed": ("ic_seed", _int),
        "location": ("ic_location", _float), "width": ("ic_width", _float),
        "grass": ("ic_grass", _float), "sapling": ("ic_sapling", _float),
        "tree": ("ic_tree", _float), "forest": ("ic_forest", _float),
        "noise": ("ic_noise", _float),
    },
    "time": {"step": ("step", _float), "t_end": ("t_end", _float),
             "snapshot_stride": ("snapshot_stride", _int)},
}

_FIELD_TO_SECTION_KEY: dict[str, tuple[str, str]] = {}
for _section, _keys in _SCHEMA.items():
    for _key, (_field, _) in _keys.items():
        _FIELD_TO_SECTION_KEY.setdefault(_field, (_section, _key))


def parse_config(text: str) -> RunConfig:
    """Parse INI-style text into a validated RunConfig.

    Unknown sections or keys, malformed values and constraint violations all
    raise :class:`ConfigError` naming the line and key.
    """
    values: dict[str, object] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        schema = _SCHEMA[section]
        if key not in schema:
            raise ConfigError(f"unknown key in [{section}]", line=lineno, key=key)
        field_name, caster = schema[key]
        try:
            values[field_name] = caster(val)
        except ValueError as exc:
            raise ConfigError(f"malformed value {val!r} ({exc})",
                              line=lineno, key=key) from exc
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def serialize_config(config: RunConfig) -> str:
    """Render a config as INI text that parses back to an identical config."""
    by_section: dict[str, list[str]] = {}
    for f in dc_fields(config):
        value = getattr(config, f.name)
        if value is None:
            continue
        section, key = _FIELD_TO_SECTION_KEY[f.name]
        if isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        by_section.setdefault(section, []).append(f"{key} = {rendered}")
    chunks = []
    for section in _SCHEMA:
        if section in by_section:
            chunks.append(f"[{section}]")
            chunks.extend(by_section[section])
            chunks.append("")
    return "\n".join(chunks)
