"""Spatial parameter gradients and sigmoidal response functions.

Gradients are small immutable callables mapping position to a parameter
value; they stand in for environmental variation (rainfall, morphogen
levels) along the domain.  All of them evaluate on scalars or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid1D


@dataclass(frozen=True)
class SigmoidResponse:
    """Smooth sigmoidal response ``lo + (hi - lo) / (1 + exp(-(g - threshold)/steepness))``.

    Monotone increasing when ``hi > lo``, decreasing otherwise, and exactly
    ``(lo + hi)/2`` at the threshold.
    """

    lo: float
    hi: float
    threshold: float
    steepness: float

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not self.steepness > 0:
            raise ValueError(f"steepness must be positive, got {self.steepness}")

    def __call__(self, g):
        g = np.asarray(g, dtype=float)
        z = np.clip(-(g - self.threshold) / self.steepness, -700.0, 700.0)
        out = self.lo + (self.hi - self.lo) / (1.0 + np.exp(z))
        return out if out.ndim else float(out)


def recruitment_response() -> SigmoidResponse:
    """Sapling-to-adult recruitment rate vs grass cover (suppressed by fire)."""
    return SigmoidResponse(lo=0.9, hi=0.4, threshold=0.4, steepness=0.01)


def forest_mortality_response() -> SigmoidResponse:
    """Forest-tree fire mortality vs grass cover (promoted by fire)."""
    return SigmoidResponse(lo=0.1, hi=0.9, threshold=0.4, steepness=0.05)


@dataclass(frozen=True)
class LinearGradient:
    """Affine profile ``intercept + slope * x``."""

    intercept: float
    slope: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.intercept + self.slope * x
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class SlopeProfile:
    """Clamped ramp centered at 0.5: ``clip(0.5 + p_s * (x - 0.5), 0, 1)``.

    ``p_s = 1`` is the identity on [0, 1]; larger values steepen the central
    ramp and create flat plateaus of width ``(1 - 1/p_s)/2`` on each side.
    """

    p_s: float

    def __post_init__(self):
        if not self.p_s >= 1.0:
            raise ValueError(f"slope parameter must be >= 1, got {self.p_s}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip(0.5 + self.p_s * (x - 0.5), 0.0, 1.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ProfiledGradient:
    """Gradient traversed at variable speed: ``intercept + coefficient * profile(x)``."""

    intercept: float
    coefficient: float
    profile: SlopeProfile

    def __call__(self, x):
        return self.intercept + self.coefficient * self.profile(x)


@dataclass(frozen=True)
class SmoothstepGradient:
    """Monotone nonlinear profile with the same endpoints as a linear ramp.

    Cubic smoothstep between ``start`` (at ``x_min``) and ``end`` (at
    ``x_max``); used to probe robustness against nonlinearity of a gradient.
    """

    start: float
    end: float
    x_min: float = 0.0
    x_max: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - self.x_min) / (self.x_max - self.x_min), 0.0, 1.0)
        out = self.start + (self.end - self.start) * t * t * (3.0 - 2.0 * t)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class NoisyGradient:
    """Linear gradient with seeded i.i.d. uniform noise in [-amplitude, amplitude].

    Deterministic for a fixed (seed, grid, amplitude); reduces exactly to the
    base gradient at amplitude zero.  Uses a counter-based generator so the
    draw only depends on the seed, never on call order.
    """

    base: LinearGradient
    amplitude: float
    seed: int

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")

    def sample(self, grid: Grid1D) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(self.seed))
        noise = rng.uniform(-self.amplitude, self.amplitude, grid.n)
        return self.base(grid.nodes) + noise


@dataclass(frozen=True)
class MorphogenPath:
    """Piecewise-linear path in (rho_E, rho_N) space across the domain.

    Constant at ``p1`` for ``x <= r_lo`` and at ``p2`` for ``x >= r_hi``, with
    linear interpolation in between; continuous everywhere.
    """

    p1: tuple[float, float]
    p2: tuple[float, float]
    r_lo: float
    r_hi: float

    def __post_init__(self):
        if not self.r_lo < self.r_hi:
            raise ValueError(f"need r_lo < r_hi, got [{self.r_lo}, {self.r_hi}]")
        if min(*self.p1, *self.p2) < 0:
            raise ValueError("morphogen levels must be nonnegative")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = np.clip((x - self.r_lo) / (self.r_hi - self.r_lo), 0.0, 1.0)
        rho_e = self.p1[0] + t * (self.p2[0] - self.p1[0])
        rho_n = self.p1[1] + t * (self.p2[1] - self.p1[1])
        if rho_e.ndim:
            return rho_e, rho_n
        return float(rho_e), float(rho_n)


# Config defaults for the arealization morphogen path: symmetric about the
# diagonal and straddling it, crossing where the instability band is widest
# so a wide gradient region fits several pattern wavelengths.  Presets check
# this path against the computed instability map before running a
# pattern-formation experiment.
DEFAULT_MORPHOGEN_ENDPOINTS = ((0.20, 0.32), (0.32, 0.20))


def default_morphogen_path(r_lo: float, r_hi: float) -> MorphogenPath:
    p1, p2 = DEFAULT_MORPHOGEN_ENDPOINTS
    return MorphogenPath(p1=p1, p2=p2, r_lo=r_lo, r_hi=r_hi)


def evaluate_gradient(gradient, grid: Grid1D) -> np.ndarray:
    """Realize a gradient object as a field of values on the grid nodes."""
    if hasattr(gradient, "sample"):
        return gradient.sample(grid)
    return np.asarray(gradient(grid.nodes), dtype=float)
