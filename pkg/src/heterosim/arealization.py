"""Four-field chemotaxis model of cortical arealization.

Marker levels ``E`` (entorhinal fate) and ``N`` (neocortical fate) compete
through Lotka-Volterra kinetics, are promoted by morphogen inputs
``rho_E(x)``, ``rho_N(x)``, diffuse, and aggregate chemotactically toward
their own diffusible monitor species ``C_E``, ``C_N``.  Aggregation is
saturated by a Ricker flux limiter, which keeps solutions bounded.

The module provides the homogeneous equilibrium analysis (multiplicity,
cusp/bistability window), the linearized dispersion relation used to map the
pattern-forming (Turing) region, and a semi-implicit 1D solver with no-flux
boundaries: diffusion is treated implicitly per field with a tridiagonal
solve, reaction and the conservative face-flux chemotaxis term explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowupError, FieldBoundsError
from .grids import Grid1D
from .savanna import SimulationRun

AREAL_FIELD_NAMES = ("E", "C_E", "N", "C_N")
EQ_RESIDUAL_TOL = 1e-12
DEDUP_TOL = 1e-8
# At a degenerate (double/triple) root a residual of 1e-13 only pins the
# location to ~(1e-13)**(1/3); converged copies inside that radius are one root.
DEGENERACY_TOL = 5e-5
NEWTON_START_GRID = np.linspace(0.0, 1.5, 7)  # 49 starts on [0, 1.5]^2


@dataclass(frozen=True)
class ArealParams:
    """Model parameters; the defaults are the standard working values."""

    k1: float = 2.0       # competition of N on E
    k2: float = 2.0       # competition of E on N
    d_e: float = 0.2
    d_ce: float = 0.2
    d_n: float = 0.2
    d_cn: float = 0.2
    chi1: float = 1.5     # E aggregation strength
    chi2: float = 1.5     # N aggregation strength
    alpha_sat: float = 1.2
    morphogens: object = None  # MorphogenPath or (rho_e, rho_n) pair

    def __post_init__(self):
        for name in ("d_e", "d_ce", "d_n", "d_cn", "alpha_sat"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.chi1 < 0 or self.chi2 < 0:
            raise ValueError("adhesion strengths must be nonnegative")


def ricker(z, alpha_sat: float):
    """Saturating flux limiter ``alpha * z * exp(-alpha * z)``, maximal at ``1/alpha``."""
    if not alpha_sat > 0:
        raise ValueError(f"alpha_sat must be positive, got {alpha_sat}")
    z = np.asarray(z, dtype=float)
    out = alpha_sat * z * np.exp(-alpha_sat * z)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HomogeneousEquilibrium:
    """Constant steady state; the monitor fields equal their sources there."""

    e: float
    n: float
    stable_k0: bool
    residual: float

    @property
    def state(self) -> np.ndarray:
        return np.array([self.e, self.e, self.n, self.n])


def _residuals(e, n, rho_e, rho_n, k1, k2):
    f1 = e * (1.0 - e - k1 * n) + rho_e
    f2 = n * (1.0 - n - k2 * e) + rho_n
    return f1, f2


def _reaction_jacobian(e, n, k1, k2):
    return (1.0 - 2.0 * e - k1 * n, -k1 * e,
            -k2 * n, 1.0 - 2.0 * n - k2 * e)


def _newton_2d(e, n, rho_e, rho_n, k1, k2, iterations=60):
    """Vectorized damped Newton on the two equilibrium residuals.

    All arguments broadcast; the update formulas treat the two components
    symmetrically so that swapping (e, rho_e, k1) with (n, rho_n, k2) yields
    the bitwise-mirrored iteration.
    """
    e = np.array(e, dtype=float)
    n = np.array(n, dtype=float)
    for _ in range(iterations):
        f1, f2 = _residuals(e, n, rho_e, rho_n, k1, k2)
        norm = f1 * f1 + f2 * f2
        if float(np.max(norm)) < (0.1 * EQ_RESIDUAL_TOL) ** 2:
            break
        a, b, c, d = _reaction_jacobian(e, n, k1, k2)
        det = a * d - b * c
        safe = np.abs(det) > 1e-14
        det = np.where(safe, det, 1.0)
        de = (d * f1 - b * f2) / det
        dn = (a * f2 - c * f1) / det
        step = np.ones_like(e)
        for _ in range(8):  # backtrack until the residual norm decreases
            e_try = e - step * de
            n_try = n - step * dn
            g1, g2 = _residuals(e_try, n_try, rho_e, rho_n, k1, k2)
            better = (g1 * g1 + g2 * g2 < norm) | ~safe
            if bool(np.all(better)):
                break
            step = np.where(better, step, 0.5 * step)
        e = np.where(safe, e - step * de, e)
        n = np.where(safe, n - step * dn, n)
    f1, f2 = _residuals(e, n, rho_e, rho_n, k1, k2)
    res = np.maximum(np.abs(f1), np.abs(f2))
    return e, n, res


def homogeneous_equilibria(rho_e: float, rho_n: float,
                           k1: float = 2.0, k2: float = 2.0) -> list[HomogeneousEquilibrium]:
    """All nonnegative constant solutions for the given morphogen levels.

    Multi-start Newton from a 7x7 grid of starts, deduplicated; linear (k=0)
    stability comes from the 2x2 reaction Jacobian, which the monitor fields
    do not alter (they contribute eigenvalues -1 at k=0).  The fully void
    state E = N = 0, which only solves the system in the completely unforced
    corner, is excluded.
    """
    ee, nn = np.meshgrid(NEWTON_START_GRID, NEWTON_START_GRID, indexing="ij")
    e, n, res = _newton_2d(ee.ravel(), nn.ravel(), rho_e, rho_n, k1, k2)
    ok = (res <= EQ_RESIDUAL_TOL) & (e >= -1e-9) & (n >= -1e-9)
    roots: list[tuple[float, float, float]] = []
    for ei, ni, ri in zip(e[ok], n[ok], res[ok]):
        ei = max(float(ei), 0.0)
        ni = max(float(ni), 0.0)
        if max(ei, ni) < 1e-8:
            continue
        merged = False
        for j, r in enumerate(roots):
            if max(abs(ei - r[0]), abs(ni - r[1])) < max(DEDUP_TOL, DEGENERACY_TOL):
                if ri < r[2]:  # keep the best-converged representative
                    roots[j] = (ei, ni, float(ri))
                merged = True
                break
        if not merged:
            roots.append((ei, ni, float(ri)))
    roots.sort(key=lambda r: (-r[0], -r[1]))
    out = []
    for ei, ni, ri in roots:
        a, b, c, d = _reaction_jacobian(ei, ni, k1, k2)
        tr = a + d
        det = a * d - b * c
        # 2x2 stability: trace negative and determinant positive
        stable = tr < 0.0 and det > 0.0
        out.append(HomogeneousEquilibrium(ei, ni, stable, ri))
    return out


def bistable_window(rho_n: float, rho_e_range: tuple[float, float] = (0.0, 0.5),
                    scan_points: int = 201, k1: float = 2.0, k2: float = 2.0,
                    tol: float = 1e-5) -> tuple[float, float] | None:
    """Fold locations in ``rho_e`` bounding the multi-equilibrium window, or None.

    Sweeps the solution count over the range and bisects each 1 <-> 3
    transition down to ``tol``.
    """
    lo, hi = rho_e_range

    def count(rho_e):
        return len(homogeneous_equilibria(rho_e, rho_n, k1, k2))

    grid = np.linspace(lo, hi, scan_points)
    counts = np.array([count(r) for r in grid])
    multi = counts >= 2
    if not multi.any():
        return None

    def bisect(r_single, r_multi):
        for _ in range(200):
            if abs(r_multi - r_single) <= tol:
                break
            mid = 0.5 * (r_single + r_multi)
            if count(mid) >= 2:
                r_multi = mid
            else:
                r_single = mid
        return 0.5 * (r_single + r_multi)

    first = int(np.argmax(multi))
    last = len(multi) - 1 - int(np.argmax(multi[::-1]))
    fold_lo = grid[first] if first == 0 else bisect(grid[first - 1], grid[first])
    fold_hi = grid[last] if last == len(grid) - 1 else bisect(grid[last + 1], grid[last])
    return float(fold_lo), float(fold_hi)


def linearized_matrix(eq: HomogeneousEquilibrium, k: float,
                      params: ArealParams) -> np.ndarray:
    """Linearization of the four-field system about ``eq`` for Fourier mode ``k``.

    Field order (E, C_E, N, C_N).  About a constant state the chemotaxis flux
    linearizes to ``chi * Phi(E_bar) * k^2`` acting on the monitor
    perturbation, entering the marker row with a positive sign.
    """
    if eq.residual > EQ_RESIDUAL_TOL:
        raise ValueError(f"equilibrium residual {eq.residual:.2e} exceeds {EQ_RESIDUAL_TOL}")
    a, b, c, d = _reaction_jacobian(eq.e, eq.n, params.k1, params.k2)
    k2 = k * k
    m = np.zeros((4, 4))
    m[0, 0] = a - k2 * params.d_e
    m[0, 1] = params.chi1 * ricker(eq.e, params.alpha_sat) * k2
    m[0, 2] = b
    m[1, 0] = 1.0
    m[1, 1] = -1.0 - k2 * params.d_ce
    m[2, 0] = c
    m[2, 2] = d - k2 * params.d_n
    m[2, 3] = params.chi2 * ricker(eq.n, params.alpha_sat) * k2
    m[3, 2] = 1.0
    m[3, 3] = -1.0 - k2 * params.d_cn
    return m


@dataclass(frozen=True)
class DispersionResult:
    wavenumbers: np.ndarray
    growth: np.ndarray
    max_growth: float
    argmax_k: float


def _growth_curve(eq, params, ks):
    """Max real eigenvalue of the linearization for each wavenumber."""
    k2 = ks * ks
    a, b, c, d = _reaction_jacobian(eq.e, eq.n, params.k1, params.k2)
    m = np.zeros((len(ks), 4, 4))
    m[:, 0, 0] = a - k2 * params.d_e
    m[:, 0, 1] = params.chi1 * ricker(eq.e, params.alpha_sat) * k2
    m[:, 0, 2] = b
    m[:, 1, 0] = 1.0
    m[:, 1, 1] = -1.0 - k2 * params.d_ce
    m[:, 2, 0] = c
    m[:, 2, 2] = d - k2 * params.d_n
    m[:, 2, 3] = params.chi2 * ricker(eq.n, params.alpha_sat) * k2
    m[:, 3, 2] = 1.0
    m[:, 3, 3] = -1.0 - k2 * params.d_cn
    return np.linalg.eigvals(m).real.max(axis=1)


def dispersion(eq: HomogeneousEquilibrium, params: ArealParams,
               length: float = 40.0, n_modes: int = 200) -> DispersionResult:
    """Growth rates over the no-flux mode set ``k_m = m pi / length``.

    Only defined for equilibria stable without spatial interactions, matching
    the construction of the instability map.
    """
    if not eq.stable_k0:
        raise ValueError("dispersion is defined for k0-stable equilibria only")
    ks = np.arange(n_modes + 1) * np.pi / length
    growth = _growth_curve(eq, params, ks)
    best = int(np.argmax(growth))
    return DispersionResult(ks, growth, float(growth[best]), float(ks[best]))


@dataclass(frozen=True)
class TuringHeatmap:
    """Max growth over all k0-stable equilibria per morphogen cell (NaN: none)."""

    rho_e: np.ndarray
    rho_n: np.ndarray
    growth: np.ndarray


def turing_heatmap(rho_e_range: tuple[float, float], rho_n_range: tuple[float, float],
                   resolution: int, params: ArealParams,
                   length: float = 40.0, n_modes: int = 200) -> TuringHeatmap:
    """Scan morphogen space for chemotaxis-driven instability of stable states."""
    if resolution < 50:
        raise ValueError(f"resolution must be at least 50 per axis, got {resolution}")
    rho_e = np.linspace(*rho_e_range, resolution)
    rho_n = np.linspace(*rho_n_range, resolution)
    growth = np.full((resolution, resolution), np.nan)
    ks = np.arange(n_modes + 1) * np.pi / length
    for i, re_ in enumerate(rho_e):
        for j, rn in enumerate(rho_n):
            best = np.nan
            for eq in homogeneous_equilibria(re_, rn, params.k1, params.k2):
                if not eq.stable_k0:
                    continue
                g = float(_growth_curve(eq, params, ks).max())
                best = g if np.isnan(best) else max(best, g)
            growth[i, j] = best
    return TuringHeatmap(rho_e, rho_n, growth)


def validate_morphogen_path(path, params: ArealParams, n_samples: int = 41,
                            length: float = 40.0, n_modes: int = 200):
    """Check that a morphogen path crosses the pattern-forming region.

    Returns ``(crosses, best_growth, best_point)`` where ``best_point`` is the
    (rho_e, rho_n) sample with the largest growth rate.
    """
    ts = np.linspace(0.0, 1.0, n_samples)
    p1 = np.asarray(path.p1, dtype=float)
    p2 = np.asarray(path.p2, dtype=float)
    best = -np.inf
    best_point = (float(p1[0]), float(p1[1]))
    ks = np.arange(n_modes + 1) * np.pi / length
    for t in ts:
        re_, rn = p1 + t * (p2 - p1)
        for eq in homogeneous_equilibria(re_, rn, params.k1, params.k2):
            if not eq.stable_k0:
                continue
            g = float(_growth_curve(eq, params, ks).max())
            if g > best:
                best = g
                best_point = (float(re_), float(rn))
    return best > 0.0, best, best_point


# ---------------------------------------------------------------------------
# Semi-implicit time stepper.
# ---------------------------------------------------------------------------

class ArealOutcome(Enum):
    FRONT = "front"
    SPIKES = "spikes"
    HOMOGENEOUS = "homogeneous"


@dataclass(frozen=True)
class Outcome:
    kind: ArealOutcome
    spike_count: int


def _neumann_banded(n: int, c: float) -> np.ndarray:
    """Banded form of ``I - c * L`` with the mass-conserving Neumann Laplacian.

    The boundary rows use the half-cell finite-volume closure
    ``(L u)_0 = 2 (u_1 - u_0) / dx^2`` so that the trapezoid mass
    ``sum m_i u_i`` is conserved exactly by the implicit solve.
    """
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + 2.0 * c
    ab[0, 1:] = -c
    ab[2, :-1] = -c
    ab[0, 1] = -2.0 * c
    ab[2, n - 2] = -2.0 * c
    return ab


class ArealScheme:
    """One semi-implicit step of the four-field system on a uniform grid.

    Exposed as a class so tests can drive the pieces (pure diffusion, scheme
    fixed points) directly; ``simulate_areal`` is the user-facing wrapper.
    """

    def __init__(self, params: ArealParams, grid: Grid1D, h: float,
                 rho_e_field: np.ndarray, rho_n_field: np.ndarray,
                 include_reaction: bool = True):
        if not 0 < h <= 0.2:
            raise ValueError(f"step size must lie in (0, 0.2], got {h}")
        self.params = params
        self.grid = grid
        self.h = h
        self.rho_e = np.asarray(rho_e_field, dtype=float)
        self.rho_n = np.asarray(rho_n_field, dtype=float)
        self.include_reaction = include_reaction
        dx = grid.spacing
        self._dx = dx
        self._mass = np.full(grid.n, dx)
        self._mass[0] = self._mass[-1] = 0.5 * dx
        self._bands = {
            name: _neumann_banded(grid.n, h * d / (dx * dx))
            for name, d in zip(AREAL_FIELD_NAMES,
                               (params.d_e, params.d_ce, params.d_n, params.d_cn))
        }

    def chemotaxis_divergence(self, density: np.ndarray, monitor: np.ndarray,
                              chi: float) -> np.ndarray:
        """Conservative divergence of the saturated aggregation flux.

        Face fluxes ``chi * Phi(density_face) * dC/dx`` with arithmetic-mean
        face values and zero flux through the boundary faces; the telescoping
        sum makes the term exactly mass free.
        """
        dx = self._dx
        face_density = 0.5 * (density[:-1] + density[1:])
        flux = chi * ricker(face_density, self.params.alpha_sat) * np.diff(monitor) / dx
        div = np.empty_like(density)
        div[1:-1] = (flux[1:] - flux[:-1]) / dx
        div[0] = flux[0] / (0.5 * dx)
        div[-1] = -flux[-1] / (0.5 * dx)
        return div

    def explicit_rates(self, state: np.ndarray) -> np.ndarray:
        e, ce, n, cn = state
        rates = np.zeros_like(state)
        if self.include_reaction:
            rates[0] = e * (1.0 - e - self.params.k1 * n) + self.rho_e
            rates[1] = e - ce
            rates[2] = n * (1.0 - n - self.params.k2 * e) + self.rho_n
            rates[3] = n - cn
        if self.params.chi1 != 0.0:
            rates[0] -= self.chemotaxis_divergence(e, ce, self.params.chi1)
        if self.params.chi2 != 0.0:
            rates[2] -= self.chemotaxis_divergence(n, cn, self.params.chi2)
        return rates

    def step(self, state: np.ndarray) -> np.ndarray:
        rhs = state + self.h * self.explicit_rates(state)
        out = np.empty_like(state)
        for i, name in enumerate(AREAL_FIELD_NAMES):
            out[i] = solve_banded((1, 1), self._bands[name], rhs[i])
        return out

    def mass(self, field: np.ndarray) -> float:
        return float(self._mass @ field)


def morphogen_fields(morphogens, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Realize a morphogen specification as two fields on the grid."""
    if hasattr(morphogens, "p1"):
        rho_e, rho_n = morphogens(grid.nodes)
        return np.asarray(rho_e), np.asarray(rho_n)
    rho_e, rho_n = morphogens
    return np.full(grid.n, float(rho_e)), np.full(grid.n, float(rho_n))


def equilibrium_profile(rho_e_field: np.ndarray, rho_n_field: np.ndarray,
                        params: ArealParams, grid: Grid1D | None = None) -> np.ndarray:
    """Continuity-tracked k0-stable equilibrium at each node's morphogen level.

    At the left edge the stable equilibrium with the largest marker total is
    taken; marching right, the stable equilibrium nearest the previous choice
    keeps the profile on one branch through any bistable stretch.  When a grid
    is supplied the monitor fields are relaxed to their own steady balance
    (C - D C'' = source) so they do not inherit the branch-switch jump, which
    would otherwise kick an O(1/dx) chemotactic flux on the first step.
    """
    n = len(rho_e_field)
    profile = np.zeros((4, n))
    prev = None
    for i in range(n):
        eqs = [q for q in homogeneous_equilibria(rho_e_field[i], rho_n_field[i],
                                                 params.k1, params.k2) if q.stable_k0]
        if not eqs:
            raise ValueError(
                f"no k0-stable equilibrium at node {i} "
                f"(rho_e={rho_e_field[i]:.4f}, rho_n={rho_n_field[i]:.4f})"
            )
        if prev is None:
            pick = max(eqs, key=lambda q: q.e + q.n)
        else:
            pick = min(eqs, key=lambda q: (q.e - prev[0]) ** 2 + (q.n - prev[2]) ** 2)
        profile[:, i] = pick.state
        prev = profile[:, i]
    if grid is not None:
        dx = grid.spacing
        for row, d in ((1, params.d_ce), (3, params.d_cn)):
            ab = _neumann_banded(n, d / (dx * dx))
            profile[row] = solve_banded((1, 1), ab, profile[row - 1])
    return profile


def simulate_areal(
    params: ArealParams,
    grid: Grid1D,
    h: float,
    t_end: float,
    *,
    morphogens=None,
    initial_state: np.ndarray | None = None,
    noise_amplitude: float = 1e-2,
    seed: int = 0,
    snapshot_stride: int = 50,
    observables: dict | None = None,
    obs_stride: int = 1,
    manifest: dict | None = None,
) -> SimulationRun:
    """Semi-implicit simulation with no-flux boundaries on the given grid.

    The default initial condition is the continuity-tracked k0-stable
    equilibrium profile of the local morphogen values plus seeded uniform
    noise (required to break symmetry for pattern formation), clipped to
    remain nonnegative.  Negative excursions below -1e-6 or non-finite values
    abort with diagnostics.
    """
    if morphogens is None:
        morphogens = params.morphogens
    if morphogens is None:
        raise ValueError("no morphogen specification provided")
    rho_e_field, rho_n_field = morphogen_fields(morphogens, grid)
    scheme = ArealScheme(params, grid, h, rho_e_field, rho_n_field)

    if initial_state is None:
        state = equilibrium_profile(rho_e_field, rho_n_field, params, grid)
        if noise_amplitude > 0:
            # perturb the marker fields only: noise on the monitor fields would
            # seed O(noise/dx) chemotactic fluxes on the first step
            rng = np.random.Generator(np.random.Philox(seed))
            state[0] += rng.uniform(-noise_amplitude, noise_amplitude, grid.n)
            state[2] += rng.uniform(-noise_amplitude, noise_amplitude, grid.n)
            state = np.maximum(state, 0.0)
    else:
        state = np.array(initial_state, dtype=float)
        if state.shape != (4, grid.n):
            raise ValueError(f"initial state shape {state.shape}, expected (4, {grid.n})")

    n_steps = int(round(t_end / h))
    snap_times = [0.0]
    snaps = [state.copy()]
    obs_times = [0.0]
    obs_values = {name: [fn(state)] for name, fn in (observables or {}).items()}

    for step in range(1, n_steps + 1):
        state = scheme.step(state)
        t = step * h
        if not np.all(np.isfinite(state)):
            raise BlowupError(f"non-finite field at t={t:g}", last_valid_time=t - h)
        lo = float(state.min())
        if lo < -1e-6:
            raise FieldBoundsError(
                f"field went negative ({lo:.3e}) at t={t:g}",
                time=t, field_min=lo, field_max=float(state.max()),
            )
        if observables and step % obs_stride == 0:
            obs_times.append(t)
            for name, fn in observables.items():
                obs_values[name].append(fn(state))
        if step % snapshot_stride == 0 or step == n_steps:
            if snap_times[-1] != t:
                snap_times.append(t)
                snaps.append(state.copy())

    run_manifest = dict(manifest or {})
    run_manifest.update({
        "h": h, "t_end": t_end, "steps": n_steps,
        "noise_amplitude": noise_amplitude, "seed": seed,
    })
    return SimulationRun(
        times=np.asarray(snap_times),
        snapshots=np.asarray(snaps),
        obs_times=np.asarray(obs_times) if observables else None,
        observables={k: np.asarray(v) for k, v in obs_values.items()} if observables else None,
        manifest=run_manifest,
    )


def classify_outcome(state: np.ndarray, grid: Grid1D, r_lo: float, r_hi: float,
                     prominence_fraction: float = 0.2) -> Outcome:
    """Label the final E field: homogeneous, front-like, or spiked.

    Spikes are counted in the gradient region padded by 2 on each side; a
    monotone front has none, and a field whose total range is below 1e-3
    counts as homogeneous.
    """
    from .diagnostics import count_spikes

    field = state[0] if state.ndim == 2 else state
    if float(np.ptp(field)) < 1e-3:
        return Outcome(ArealOutcome.HOMOGENEOUS, 0)
    spikes = count_spikes(field, grid, window=(r_lo - 2.0, r_hi + 2.0),
                          prominence_fraction=prominence_fraction)
    if spikes >= 1:
        return Outcome(ArealOutcome.SPIKES, spikes)
    return Outcome(ArealOutcome.FRONT, 0)


def measured_growth_rate(rho_e: float, rho_n: float, params: ArealParams,
                         grid: Grid1D, h: float = 0.05,
                         amplitude: float = 1e-6, fit_ceiling: float = 1e-3):
    """Measure the exponential growth of the fastest linear mode in simulation.

    Starting from a k0-stable equilibrium perturbed along the eigenvector of
    its fastest unstable no-flux mode, the modal amplitude is tracked while
    it stays in the linear regime and a log-linear fit gives the measured
    rate.  Returns ``(measured, predicted, argmax_k)``.
    """
    eqs = [q for q in homogeneous_equilibria(rho_e, rho_n, params.k1, params.k2)
           if q.stable_k0]
    if not eqs:
        raise ValueError("no k0-stable equilibrium at the requested morphogen levels")
    best = None
    for eq in eqs:
        disp = dispersion(eq, params, length=grid.length, n_modes=200)
        if best is None or disp.max_growth > best[1].max_growth:
            best = (eq, disp)
    eq, disp = best
    if disp.max_growth <= 0:
        raise ValueError("requested point is not in the pattern-forming region")

    k_star = disp.argmax_k
    mat = linearized_matrix(eq, k_star, params)
    eigvals, eigvecs = np.linalg.eig(mat)
    lead = int(np.argmax(eigvals.real))
    predicted = float(eigvals[lead].real)
    vec = eigvecs[:, lead]
    if np.max(np.abs(vec.imag)) > 1e-9 * np.max(np.abs(vec.real)):
        raise ValueError("leading mode is oscillatory; growth fit expects a real mode")
    vec = vec.real
    vec = vec / np.max(np.abs(vec))

    mode = np.cos(k_star * (grid.nodes - grid.x_min))
    state0 = eq.state[:, None] + amplitude * vec[:, None] * mode[None, :]
    weight = mode * np.concatenate(([0.5], np.ones(grid.n - 2), [0.5]))
    norm = float(weight @ mode)

    def modal_amplitude(state):
        return float(weight @ (state[0] - eq.e)) / norm

    run = simulate_areal(
        params, grid, h, t_end=min(40.0, 12.0 / max(predicted, 1e-3)),
        morphogens=(rho_e, rho_n), initial_state=state0,
        observables={"a": modal_amplitude}, obs_stride=1, snapshot_stride=10 ** 9,
    )
    a = np.abs(run.observables["a"])
    ts = run.obs_times
    mask = (a > 0) & (a < fit_ceiling)
    # require a decade of clean growth for the fit
    mask &= ts <= (ts[mask][-1] if mask.any() else 0.0)
    if mask.sum() < 10:
        raise ValueError("not enough samples in the linear regime for a growth fit")
    coeffs = np.polyfit(ts[mask], np.log(a[mask]), 1)
    return float(coeffs[0]), predicted, float(k_star)
