"""Right-hand sides and explicit time stepping for the savanna-forest models.

Two levels of the fire-vegetation competition model are implemented:

* the grass-forest reduction, a single scalar field ``G`` (forest is
  ``1 - G``), and
* the full four-type model with grass ``G``, savanna saplings ``S``, adult
  savanna trees ``T`` and forest trees ``F`` constrained pointwise to the
  probability simplex ``G + S + T + F = 1``.

Nonlocal interactions (fire spread, seed dispersal) enter through
:class:`~heterosim.grids.DiscreteConvolution` operators; the "nonspatial"
variants replace every convolution by the local field value, giving the ODE
family used for bifurcation analysis.  The four rate expressions cancel term
by term, so the simplex constraint is preserved by construction rather than
by renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BlowupError, FieldBoundsError
from .gradients import (
    SigmoidResponse,
    forest_mortality_response,
    recruitment_response,
)
from .grids import BoundaryCondition, DiscreteConvolution, Grid1D

SIMPLEX_TOL = 1e-6
DEFAULT_FIELD_BOUNDS = (-1e-6, 1.0 + 1e-6)
SL_FIELD_NAMES = ("G", "S", "T", "F")


@dataclass(frozen=True)
class SLParams:
    """Parameters of the four-type model with their standard default values."""

    mu: float = 0.1    # sapling mortality
    nu: float = 0.05   # adult savanna tree mortality
    omega: SigmoidResponse = field(default_factory=recruitment_response)
    phi: SigmoidResponse = field(default_factory=forest_mortality_response)
    alpha: object = None  # forest birth-rate gradient, callable of x
    beta: object = None   # savanna birth-rate gradient, callable of x
    sigma_f: float = 0.025
    sigma_t: float = 0.025
    sigma_w: float = 0.025
    bc: BoundaryCondition = BoundaryCondition.REFLECTING

    def __post_init__(self):
        if self.mu < 0 or self.nu < 0:
            raise ValueError("mortality rates must be nonnegative")
        for name in ("sigma_f", "sigma_t", "sigma_w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def rhs_grassforest_nonspatial(g, alpha_x, phi: SigmoidResponse | None = None):
    """Local grass dynamics ``(1 - G) * (phi(G) - alpha * G)``.

    This is the ODE family indexed by position once the forest birth rate
    ``alpha`` is read off a gradient at that position.
    """
    if phi is None:
        phi = forest_mortality_response()
    g = np.asarray(g, dtype=float)
    out = (1.0 - g) * (phi(g) - np.asarray(alpha_x) * g)
    return out if out.ndim else float(out)


def _check_simplex(state: np.ndarray) -> None:
    total = state.sum(axis=-1)
    err = float(np.max(np.abs(total - 1.0)))
    if err > SIMPLEX_TOL:
        raise ValueError(f"state violates the simplex constraint by {err:.3e}")
    low = float(state.min())
    if low < -SIMPLEX_TOL:
        raise ValueError(f"state has negative cover fraction {low:.3e}")


def rhs_sl4_nonspatial(state, alpha_x, beta_x, params: SLParams | None = None):
    """Four-type rates with every nonlocal term replaced by the local value.

    ``state`` holds ``(G, S, T, F)`` along its last axis and may carry any
    number of leading batch axes; ``alpha_x`` and ``beta_x`` broadcast against
    those.  The four components of the result sum to zero pointwise.
    """
    if params is None:
        params = SLParams()
    state = np.asarray(state, dtype=float)
    _check_simplex(state)
    g, s, t, f = np.moveaxis(state, -1, 0)
    return np.stack(_sl4_rates(g, s, t, f, g, t, f, alpha_x, beta_x, params), axis=-1)


def _sl4_rates(g, s, t, f, w_of_g, j_of_t, j_of_f, alpha, beta, params: SLParams):
    """Shared rate expressions; nonlocal inputs are passed in explicitly."""
    om = params.omega(w_of_g)
    ph = params.phi(w_of_g)
    forest_press = alpha * j_of_f
    savanna_press = beta * g * j_of_t
    dg = params.mu * s + params.nu * t + ph * f - forest_press * g - savanna_press
    ds = -params.mu * s - om * s - forest_press * s + savanna_press
    dt = -params.nu * t + om * s - forest_press * t
    df = forest_press * (g + s + t) - ph * f
    return dg, ds, dt, df


def rhs_grassforest_spatial(
    g: np.ndarray,
    conv_w: DiscreteConvolution,
    conv_f: DiscreteConvolution,
    alpha_field: np.ndarray,
    phi: SigmoidResponse | None = None,
) -> np.ndarray:
    """Spatial grass-forest rates ``phi(w*G)(1-G) - alpha G (1 - J_F*G)``."""
    if phi is None:
        phi = forest_mortality_response()
    if conv_w.grid != conv_f.grid:
        raise ValueError("fire and seed operators live on different grids")
    g = np.asarray(g, dtype=float)
    if g.shape != (conv_w.grid.n,):
        raise ValueError(f"field shape {g.shape} does not match grid n={conv_w.grid.n}")
    return phi(conv_w.matrix @ g) * (1.0 - g) - alpha_field * g * (1.0 - conv_f.matrix @ g)


def rhs_sl4_spatial(
    state: np.ndarray,
    conv_w: DiscreteConvolution,
    conv_t: DiscreteConvolution,
    conv_f: DiscreteConvolution,
    alpha_field: np.ndarray,
    beta_field: np.ndarray,
    params: SLParams | None = None,
) -> np.ndarray:
    """Four-type spatial rates; ``state`` has shape ``(4, n)`` ordered G, S, T, F."""
    if params is None:
        params = SLParams()
    for conv in (conv_t, conv_f):
        if conv.grid != conv_w.grid:
            raise ValueError("convolution operators live on different grids")
    state = np.asarray(state, dtype=float)
    if state.shape != (4, conv_w.grid.n):
        raise ValueError(f"state shape {state.shape}, expected (4, {conv_w.grid.n})")
    _check_simplex(np.moveaxis(state, 0, -1))
    g, s, t, f = state
    rates = _sl4_rates(
        g, s, t, f,
        conv_w.matrix @ g, conv_t.matrix @ t, conv_f.matrix @ f,
        alpha_field, beta_field, params,
    )
    return np.stack(rates, axis=0)


def make_grassforest_rhs(conv_w, conv_f, alpha_field, phi=None) -> Callable:
    """Close over the operators so the result is a pure function of the field."""
    def rhs(g):
        return rhs_grassforest_spatial(g, conv_w, conv_f, alpha_field, phi)
    return rhs


def make_sl4_rhs(conv_w, conv_t, conv_f, alpha_field, beta_field, params=None) -> Callable:
    def rhs(state):
        return rhs_sl4_spatial(state, conv_w, conv_t, conv_f, alpha_field, beta_field, params)
    return rhs


@dataclass
class SimulationRun:
    """Trajectory record: snapshot times, snapshots and optional observables."""

    times: np.ndarray
    snapshots: np.ndarray
    obs_times: np.ndarray | None = None
    observables: dict | None = None
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.snapshots):
            raise ValueError("snapshot count must equal time count")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final_state(self) -> np.ndarray:
        return self.snapshots[-1]


def euler_simulate(
    rhs: Callable[[np.ndarray], np.ndarray],
    initial_state: np.ndarray,
    h: float,
    t_end: float,
    snapshot_stride: int = 1,
    *,
    observables: dict[str, Callable[[np.ndarray], float]] | None = None,
    obs_stride: int = 1,
    bounds: tuple[float, float] | None = DEFAULT_FIELD_BOUNDS,
    track_simplex: bool = False,
    manifest: dict | None = None,
) -> SimulationRun:
    """Forward-Euler trajectory of ``state' = rhs(state)``.

    No clipping or renormalization is applied: a field leaving ``bounds``
    aborts with :class:`FieldBoundsError`, and NaN/Inf aborts with
    :class:`BlowupError` carrying the last valid time, so scheme instability
    surfaces instead of being masked.  With ``track_simplex`` the maximum
    deviation of the pointwise component sum from one is recorded in the
    manifest (cover-fraction states only).

    Parameters
    ----------
    rhs : callable
        Maps a state array to its rate array (same shape).
    h : float
        Time step; capped at 0.1, inside the scheme's stability envelope.
    snapshot_stride : int
        Snapshots are stored every this many steps (plus the final state).
    observables : dict, optional
        Named scalar reductions recorded every ``obs_stride`` steps, useful
        for dense time series without storing every snapshot.
    """
    if not 0 < h <= 0.1:
        raise ValueError(f"step size must lie in (0, 0.1], got {h}")
    if snapshot_stride < 1 or obs_stride < 1:
        raise ValueError("strides must be >= 1")

    state = np.array(initial_state, dtype=float)
    n_steps = int(round(t_end / h))
    sum_axis = 0 if track_simplex else None

    snap_times = [0.0]
    snaps = [state.copy()]
    obs_times = [0.0]
    obs_values = {name: [fn(state)] for name, fn in (observables or {}).items()}
    max_drift = 0.0

    t = 0.0
    for step in range(1, n_steps + 1):
        state = state + h * rhs(state)
        t = step * h
        if not np.all(np.isfinite(state)):
            raise BlowupError(f"non-finite state at t={t:g}", last_valid_time=t - h)
        lo = float(state.min())
        hi = float(state.max())
        if bounds is not None and (lo < bounds[0] or hi > bounds[1]):
            raise FieldBoundsError(
                f"field left [{bounds[0]:g}, {bounds[1]:g}] at t={t:g} "
                f"(min={lo:.3e}, max={hi:.3e}); refusing to clip",
                time=t, field_min=lo, field_max=hi,
            )
        if sum_axis is not None:
            drift = float(np.max(np.abs(state.sum(axis=sum_axis) - 1.0)))
            max_drift = max(max_drift, drift)
        if observables and step % obs_stride == 0:
            obs_times.append(t)
            for name, fn in observables.items():
                obs_values[name].append(fn(state))
        if step % snapshot_stride == 0 or step == n_steps:
            if not snap_times or snap_times[-1] != t:
                snap_times.append(t)
                snaps.append(state.copy())

    run_manifest = dict(manifest or {})
    run_manifest.update({"h": h, "t_end": t_end, "steps": n_steps})
    if track_simplex:
        run_manifest["max_simplex_drift"] = max_drift
    return SimulationRun(
        times=np.asarray(snap_times),
        snapshots=np.asarray(snaps),
        obs_times=np.asarray(obs_times) if observables else None,
        observables={k: np.asarray(v) for k, v in obs_values.items()} if observables else None,
        manifest=run_manifest,
    )


# ---------------------------------------------------------------------------
# Initial-condition library.  The wave and multistability experiments sweep a
# documented set of starting states; each run records which one it used.
# ---------------------------------------------------------------------------

def ic_uniform(grid: Grid1D, cover: tuple[float, float, float, float]) -> np.ndarray:
    """Spatially uniform simplex state."""
    cover = np.asarray(cover, dtype=float)
    if abs(cover.sum() - 1.0) > SIMPLEX_TOL or cover.min() < 0:
        raise ValueError(f"cover fractions must lie on the simplex, got {cover}")
    return np.repeat(cover[:, None], grid.n, axis=1)


def ic_ramp(grid: Grid1D, left: tuple, right: tuple) -> np.ndarray:
    """Linear interpolation between two simplex states (stays on the simplex)."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    t = (grid.nodes - grid.x_min) / grid.length
    return left[:, None] + (right - left)[:, None] * t[None, :]


def ic_forest_seed(grid: Grid1D, center: float, width: float = 0.05,
                   level: float = 0.95) -> np.ndarray:
    """Grass everywhere except a forest pulse of the given width."""
    x = grid.nodes
    pulse = np.where(np.abs(x - center) <= width / 2.0, level, 0.0)
    state = np.zeros((4, grid.n))
    state[3] = pulse
    state[0] = 1.0 - pulse
    return state


def ic_random_simplex(grid: Grid1D, seed: int) -> np.ndarray:
    """Independent uniform draw from the simplex at every node."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.dirichlet(np.ones(4), size=grid.n).T


def ic_grass_with_forest_seed(grid: Grid1D, center: float, width: float = 0.05,
                              depth: float = 0.95) -> np.ndarray:
    """Scalar grass field with a localized forest pulse (grass-forest model)."""
    x = grid.nodes
    return np.where(np.abs(x - center) <= width / 2.0, 1.0 - depth, 1.0)
