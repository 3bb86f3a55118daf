"""Equilibria, stability, continuation and steady-state branch analysis.

Nonspatial systems (the scalar grass-forest family and the reduced
three-dimensional four-type family) get multi-start Newton equilibrium
finding, secant-predictor/Newton-corrector continuation with saddle-node,
transcritical and Hopf detection, and a two-parameter regime scan.

For the discretized nonlocal models the module provides damped fixed-point /
Newton steady-state solvers, integration-based stability testing, dispersal
sweeps with branch matching, and fold refinement in the dispersal parameter.

The four-type model conserves the pointwise sum of its components, which
makes the raw four-dimensional Jacobian structurally singular; all
equilibrium computations therefore run in reduced coordinates (S, T, F) with
G recovered from the simplex constraint, and full states are reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import HeterosimError, NoSteadyStateError
from .gradients import evaluate_gradient, forest_mortality_response
from .grids import BoundaryCondition, GaussianKernel, Grid1D, build_convolution
from .savanna import SLParams, _sl4_rates, euler_simulate

EIG_TOL = 1e-7          # stability classification margin
ROOT_TOL = 1e-11        # Newton residual target (reported roots satisfy 1e-10)
DEDUP_TOL = 1e-6
FD_STEP = 1e-6          # central-difference step for Jacobians


class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class EventKind(Enum):
    SADDLE_NODE = "saddle_node"
    TRANSCRITICAL = "transcritical"
    HOPF = "hopf"
    BRANCH_END = "branch_end"


def classify_stability(eigenvalues: np.ndarray, tol: float = EIG_TOL) -> Stability:
    if len(eigenvalues) == 0:
        return Stability.MARGINAL
    top = float(np.max(eigenvalues.real))
    if abs(top) <= tol:
        return Stability.MARGINAL
    return Stability.STABLE if top < 0 else Stability.UNSTABLE


@dataclass
class EquilibriumPoint:
    state: np.ndarray
    parameter: float
    eigenvalues: np.ndarray
    stability: Stability
    residual: float = 0.0

    @property
    def max_real_eigenvalue(self) -> float:
        return float(np.max(self.eigenvalues.real)) if len(self.eigenvalues) else float("nan")


@dataclass
class BranchEvent:
    index: int
    kind: EventKind
    parameter: float


@dataclass
class Branch:
    points: list[EquilibriumPoint]
    events: list[BranchEvent] = field(default_factory=list)

    @property
    def parameters(self) -> np.ndarray:
        return np.array([p.parameter for p in self.points])

    def events_of(self, kind: EventKind) -> list[BranchEvent]:
        return [e for e in self.events if e.kind is kind]


# ---------------------------------------------------------------------------
# Nonspatial systems in reduced coordinates.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonspatialSystem:
    """A family ``f(y, p)`` with maps between reduced and reported states."""

    f: Callable[[np.ndarray, float], np.ndarray]
    dim: int
    embed: Callable[[np.ndarray], np.ndarray]
    project: Callable[[np.ndarray], np.ndarray]
    name: str = ""


def grassforest_system(alpha_gradient, phi=None) -> NonspatialSystem:
    """Scalar grass dynamics indexed by position via the birth-rate gradient."""
    if phi is None:
        phi = forest_mortality_response()

    def f(y, p):
        g = y[0]
        return np.array([(1.0 - g) * (phi(g) - alpha_gradient(p) * g)])

    ident = lambda y: np.asarray(y, dtype=float)
    return NonspatialSystem(f, 1, ident, ident, name="grass-forest")


def sl4_reduced_rates(y, alpha, beta, params: SLParams):
    """Rates of (S, T, F) with G eliminated; broadcasts over leading axes."""
    s = y[..., 0]
    t = y[..., 1]
    f_ = y[..., 2]
    g = 1.0 - s - t - f_
    _, ds, dt, df = _sl4_rates(g, s, t, f_, g, t, f_, alpha, beta, params)
    return np.stack([ds, dt, df], axis=-1)


def sl4_system(alpha_gradient, beta_gradient, params: SLParams | None = None) -> NonspatialSystem:
    """Four-type local dynamics along a gradient, reduced to (S, T, F)."""
    if params is None:
        params = SLParams()

    def f(y, p):
        return sl4_reduced_rates(y, alpha_gradient(p), beta_gradient(p), params)

    def embed(y):
        g = 1.0 - float(np.sum(y))
        return np.concatenate([[g], np.asarray(y, dtype=float)])

    def project(state):
        return np.asarray(state, dtype=float)[1:4]

    return NonspatialSystem(f, 3, embed, project, name="four-type")


# ---------------------------------------------------------------------------
# Dense Newton machinery for small systems.
# ---------------------------------------------------------------------------

def _fd_jacobian(fun, y, step=FD_STEP):
    d = len(y)
    jac = np.empty((len(fun(y)), d))
    for j in range(d):
        up = y.copy()
        dn = y.copy()
        up[j] += step
        dn[j] -= step
        jac[:, j] = (fun(up) - fun(dn)) / (2.0 * step)
    return jac

def _newton_small(fun, y0, tol=ROOT_TOL, max_iter=60):
    """Damped Newton; returns (root, residual) or (None, best_residual)."""
    y = np.array(y0, dtype=float)
    fy = fun(y)
    best = float(np.max(np.abs(fy)))
    for _ in range(max_iter):
        res = float(np.max(np.abs(fy)))
        best = min(best, res)
        if res <= tol:
            return y, res
        jac = _fd_jacobian(fun, y)
        try:
            delta = np.linalg.solve(jac, fy)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, fy, rcond=None)[0]
        lam = 1.0
        norm0 = float(fy @ fy)
        while lam > 2 ** -14:
            y_try = y - lam * delta
            f_try = fun(y_try)
            if float(f_try @ f_try) < norm0:
                y, fy = y_try, f_try
                break
            lam *= 0.5
        else:
            return None, best
    res = float(np.max(np.abs(fy)))
    return (y, res) if res <= tol else (None, best)


def _eigenvalues_at(system: NonspatialSystem, y: np.ndarray, p: float) -> np.ndarray:
    jac = _fd_jacobian(lambda v: system.f(v, p), y)
    return np.linalg.eigvals(jac)


def _make_point(system, y, p, residual) -> EquilibriumPoint:
    eigs = _eigenvalues_at(system, y, p)
    return EquilibriumPoint(
        state=system.embed(y), parameter=float(p), eigenvalues=eigs,
        stability=classify_stability(eigs), residual=residual,
    )


def _start_points(system: NonspatialSystem, n_starts: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    if system.dim == 1:
        fixed = np.array([[0.0], [0.5], [1.0]])
        rest = np.linspace(0.02, 0.98, n_starts - 3)[:, None]
        return np.vstack([fixed, rest])
    anchors = np.array([
        [0.0, 0.0, 0.0],   # all grass
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.25, 0.25, 0.25],
    ])
    extra = rng.dirichlet(np.ones(4), size=max(0, n_starts - len(anchors)))[:, 1:]
    return np.vstack([anchors, extra])


def find_equilibria(system: NonspatialSystem, parameter: float,
                    n_starts: int = 30, seed: int = 0) -> list[EquilibriumPoint]:
    """All equilibria found by damped Newton from a spread of starting states.

    Roots are deduplicated at 1e-6, must satisfy a residual of 1e-10, and for
    the four-type system are restricted to the physical simplex.  Eigenvalues
    of the (reduced) finite-difference Jacobian classify stability.
    """
    if n_starts < 20:
        raise ValueError(f"need at least 20 starts, got {n_starts}")
    fun = lambda y: system.f(y, parameter)
    roots: list[tuple[np.ndarray, float]] = []
    for y0 in _start_points(system, n_starts, seed):
        y, res = _newton_small(fun, y0)
        if y is None:
            continue
        full = system.embed(y)
        if float(full.min()) < -1e-8 or float(full.max()) > 1.0 + 1e-8:
            continue
        merged = False
        for k, (y_seen, res_seen) in enumerate(roots):
            if float(np.max(np.abs(y - y_seen))) < DEDUP_TOL:
                if res < res_seen:  # keep the best-converged representative
                    roots[k] = (y, res)
                merged = True
                break
        if merged:
            continue
        roots.append((y, res))
    roots.sort(key=lambda r: -float(system.embed(r[0])[0]))  # by grass cover
    return [_make_point(system, y, parameter, res) for y, res in roots]


# ---------------------------------------------------------------------------
# Continuation.
# ---------------------------------------------------------------------------

def _count_unstable(eigs: np.ndarray, imag_tol: float = 1e-9) -> tuple[int, int]:
    """(# real eigenvalues with positive part, # complex pairs with positive part)."""
    real_mask = np.abs(eigs.imag) <= imag_tol
    n_real = int(np.sum((eigs.real > 0) & real_mask))
    n_cplx = int(np.sum((eigs.real > 0) & ~real_mask)) // 2
    return n_real, n_cplx


class _Corrector:
    """Newton corrector for the extended system [f(y,p); t.(z - z_target)]."""

    def __init__(self, system: NonspatialSystem):
        self.system = system
        self.d = system.dim

    def residual(self, z):
        return self.system.f(z[: self.d], z[self.d])

    def correct(self, z_pred, tangent, max_iter=12):
        z = np.array(z_pred, dtype=float)
        for _ in range(max_iter):
            fy = self.residual(z)
            if float(np.max(np.abs(fy))) <= ROOT_TOL:
                return z
            ext = np.append(fy, tangent @ (z - z_pred))
            jac = np.empty((self.d + 1, self.d + 1))
            jac[: self.d, :] = _fd_jacobian(self.residual, z)
            jac[self.d, :] = tangent
            try:
                delta = np.linalg.solve(jac, ext)
            except np.linalg.LinAlgError:
                return None
            z = z - delta
            if not np.all(np.isfinite(z)):
                return None
        fy = self.residual(z)
        return z if float(np.max(np.abs(fy))) <= ROOT_TOL else None

    def correct_natural(self, y_guess, p):
        root, res = _newton_small(lambda y: self.system.f(y, p), y_guess)
        if root is None:
            return None
        return np.append(root, p)

    def det_jac(self, z):
        d = self.d
        jac = _fd_jacobian(lambda y: self.system.f(y, z[d]), np.array(z[:d]))
        return float(np.linalg.det(jac))


def _bisect_on_arc(corr: _Corrector, z_a, z_b, predicate, tol_p, max_iter=60):
    """Bisection along the branch between two points for a sign predicate.

    ``predicate(z)`` must differ between the endpoints; returns the bracket
    midpoint once the parameter window shrinks below ``tol_p``.
    """
    d = corr.d
    pa = predicate(z_a)
    for _ in range(max_iter):
        if abs(z_b[d] - z_a[d]) <= tol_p and float(np.linalg.norm(z_b - z_a)) <= 1e-6:
            break
        secant = z_b - z_a
        nrm = float(np.linalg.norm(secant))
        if nrm == 0.0:
            break
        z_mid = corr.correct(0.5 * (z_a + z_b), secant / nrm)
        if z_mid is None:
            break
        if predicate(z_mid) == pa:
            z_a = z_mid
        else:
            z_b = z_mid
    return 0.5 * (z_a[d] + z_b[d])


def continue_branch(system: NonspatialSystem, p_range: tuple[float, float],
                    start: EquilibriumPoint, *, initial_step: float | None = None,
                    min_step: float = 1e-7, max_step: float | None = None,
                    max_points: int = 20000) -> Branch:
    """Trace the solution branch through ``start`` across the parameter range.

    Secant predictor with an orthogonal Newton corrector and adaptive step
    (halved on corrector failure); the branch follows folds around, flagging

    * SADDLE_NODE when the branch tangent's parameter component reverses
      (localized by bisection on the Jacobian determinant to 1e-5),
    * TRANSCRITICAL when a single real eigenvalue crosses zero with no fold,
    * HOPF when a complex pair crosses the axis (localized to 1e-4),
    * BRANCH_END when the corrector diverges at the minimum step.
    """
    p_lo, p_hi = min(p_range), max(p_range)
    width = p_hi - p_lo
    ds0 = initial_step if initial_step is not None else 1e-3 * width
    ds_max = max_step if max_step is not None else 5e-3 * width
    corr = _Corrector(system)
    d = system.dim

    y0 = system.project(start.state)
    if float(np.max(np.abs(system.f(y0, start.parameter)))) > 1e-9:
        raise ValueError("starting point is not a converged equilibrium")
    z0 = corr.correct_natural(y0, start.parameter)
    if z0 is None:
        raise ValueError("could not re-converge the starting equilibrium")

    def march(direction):
        nodes = [z0]
        eig_list = [_eigenvalues_at(system, z0[:d], z0[d])]
        events: list[tuple[EventKind, float]] = []
        tangent = np.zeros(d + 1)
        tangent[d] = direction
        prev_dp = None
        ds = ds0
        while len(nodes) < max_points:
            z = nodes[-1]
            z_new = corr.correct(z + ds * tangent, tangent)
            if z_new is None or float(np.linalg.norm(z_new - z)) > 3.0 * max(ds, ds0):
                ds *= 0.5
                if ds < min_step:
                    events.append((EventKind.BRANCH_END, float(z[d])))
                    break
                continue
            if z_new[d] > p_hi or z_new[d] < p_lo:
                bound = p_hi if z_new[d] > p_hi else p_lo
                z_end = corr.correct_natural(z[:d] + (z_new[:d] - z[:d]) * 0.5, bound)
                if z_end is not None and float(np.linalg.norm(z_end - z)) < 10.0 * ds:
                    nodes.append(z_end)
                    eig_list.append(_eigenvalues_at(system, z_end[:d], z_end[d]))
                break
            dp = z_new[d] - z[d]
            eigs_new = _eigenvalues_at(system, z_new[:d], z_new[d])
            if prev_dp is not None and dp * prev_dp < 0:
                p_star = _bisect_on_arc(corr, nodes[-2], z_new,
                                        lambda zz: corr.det_jac(zz) > 0, tol_p=1e-5)
                events.append((EventKind.SADDLE_NODE, p_star))
            else:
                old_real, old_cplx = _count_unstable(eig_list[-1])
                new_real, new_cplx = _count_unstable(eigs_new)
                if new_real != old_real:
                    p_star = _bisect_on_arc(
                        corr, z, z_new,
                        lambda zz: _count_unstable(_eigenvalues_at(system, zz[:d], zz[d]))[0] == old_real,
                        tol_p=1e-5)
                    events.append((EventKind.TRANSCRITICAL, p_star))
                if new_cplx != old_cplx:
                    p_star = _bisect_on_arc(
                        corr, z, z_new,
                        lambda zz: _count_unstable(_eigenvalues_at(system, zz[:d], zz[d]))[1] == old_cplx,
                        tol_p=1e-4)
                    events.append((EventKind.HOPF, p_star))
            nodes.append(z_new)
            eig_list.append(eigs_new)
            tangent = (z_new - z) / float(np.linalg.norm(z_new - z))
            prev_dp = dp
            ds = min(ds * 1.4, ds_max)
        return nodes, eig_list, events

    fwd_nodes, fwd_eigs, fwd_events = march(+1.0)
    bwd_nodes, bwd_eigs, bwd_events = march(-1.0)

    nodes = bwd_nodes[::-1] + fwd_nodes[1:]
    eig_list = bwd_eigs[::-1] + fwd_eigs[1:]
    points = [
        EquilibriumPoint(
            state=system.embed(z[:d]), parameter=float(z[d]), eigenvalues=e,
            stability=classify_stability(e),
            residual=float(np.max(np.abs(system.f(z[:d], z[d])))),
        )
        for z, e in zip(nodes, eig_list)
    ]
    params = np.array([pt.parameter for pt in points])
    events = []
    for kind, p_star in bwd_events + fwd_events:
        idx = int(np.argmin(np.abs(params - p_star)))
        events.append(BranchEvent(index=idx, kind=kind, parameter=float(p_star)))
    events.sort(key=lambda e: e.index)
    return Branch(points=points, events=events)


def grassforest_bistable_interval(alpha_gradient, x_range=(0.0, 1.0), phi=None,
                                  n_starts: int = 30, seed: int = 0):
    """The x-interval where grass- and forest-dominated stable branches overlap.

    Continues the two outer stable branches of the scalar family and returns
    the interval bounded by the forest branch's low-x fold and the grass
    branch's high-x fold.
    """
    system = grassforest_system(alpha_gradient, phi)
    x_lo, x_hi = x_range

    forest_start = None
    for eq in find_equilibria(system, x_hi, n_starts=n_starts, seed=seed):
        if eq.stability is Stability.STABLE and eq.state[0] < 0.5:
            forest_start = eq
            break
    if forest_start is None:
        raise HeterosimError("no stable forest-dominated equilibrium at the wet end")
    forest_branch = continue_branch(system, x_range, forest_start)
    forest_folds = [e.parameter for e in forest_branch.events_of(EventKind.SADDLE_NODE)]
    lo = min(forest_folds) if forest_folds else x_lo

    mid = 0.5 * (x_lo + x_hi)
    grass_start = None
    for eq in find_equilibria(system, mid, n_starts=n_starts, seed=seed):
        if eq.stability is Stability.STABLE and eq.state[0] > 0.5 and eq.state[0] < 1.0 - 1e-9:
            grass_start = eq
            break
    if grass_start is None:
        # grass branch is the exact all-grass state up to the exchange point
        grass_start = next(
            eq for eq in find_equilibria(system, x_lo, n_starts=n_starts, seed=seed)
            if abs(eq.state[0] - 1.0) < 1e-9
        )
    grass_branch = continue_branch(system, x_range, grass_start)
    grass_folds = [e.parameter for e in grass_branch.events_of(EventKind.SADDLE_NODE)]
    hi = max(grass_folds) if grass_folds else x_hi
    return (float(lo), float(hi)), forest_branch, grass_branch


# ---------------------------------------------------------------------------
# Two-parameter regime scan (batched over all cells).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoParamMap:
    alpha_values: np.ndarray
    beta_values: np.ndarray
    stable_count: np.ndarray   # (len(alpha), len(beta)) ints
    oscillating: np.ndarray    # same shape, bool


OSC_STARTS = np.array([
    [0.94, 0.02, 0.02, 0.02],
    [0.02, 0.02, 0.02, 0.94],
    [0.25, 0.25, 0.25, 0.25],
])
OSC_AMPLITUDE = 1e-3


def _newton_sl4_batch(y, alpha, beta, params, tol=ROOT_TOL, iterations=50):
    """Vectorized damped Newton on the reduced four-type rates."""
    y = np.array(y, dtype=float)
    fun = lambda v: sl4_reduced_rates(v, alpha, beta, params)
    for _ in range(iterations):
        fy = fun(y)
        norm = np.einsum("...i,...i->...", fy, fy)
        if float(np.max(norm)) < tol * tol:
            break
        jac = np.empty(y.shape + (3,))
        for j in range(3):
            up = y.copy()
            dn = y.copy()
            up[..., j] += FD_STEP
            dn[..., j] -= FD_STEP
            jac[..., :, j] = (fun(up) - fun(dn)) / (2.0 * FD_STEP)
        det = np.linalg.det(jac)
        bad = np.abs(det) < 1e-13
        if bad.any():
            jac[bad] += 1e-8 * np.eye(3)
        delta = np.linalg.solve(jac, fy[..., None])[..., 0]
        step = np.ones(y.shape[:-1])
        for _ in range(8):
            y_try = y - step[..., None] * delta
            f_try = fun(y_try)
            better = np.einsum("...i,...i->...", f_try, f_try) < norm
            if bool(np.all(better)):
                break
            step = np.where(better, step, 0.5 * step)
        y = y - step[..., None] * delta
    fy = fun(y)
    return y, np.max(np.abs(fy), axis=-1)


def scan_two_parameter(alpha_range: tuple[float, float], beta_range: tuple[float, float],
                       resolution: int, params: SLParams | None = None, *,
                       n_starts: int = 20, seed: int = 0,
                       t_end: float = 500.0, h: float = 0.05) -> TwoParamMap:
    """Regime map of the local four-type dynamics over a birth-rate window.

    Each cell gets its stable equilibrium count and an oscillation flag set
    by integrating from three fixed starts and requiring a sustained,
    non-decaying peak-to-peak amplitude over the last 40% of the run.
    """
    if resolution < 50:
        raise ValueError(f"resolution must be at least 50 per axis, got {resolution}")
    if params is None:
        params = SLParams()
    alphas = np.linspace(*alpha_range, resolution)
    betas = np.linspace(*beta_range, resolution)
    a_grid, b_grid = np.meshgrid(alphas, betas, indexing="ij")
    a_flat = a_grid.ravel()
    b_flat = b_grid.ravel()
    n_cells = len(a_flat)

    starts = _start_points(sl4_system(lambda x: x, lambda x: x, params), n_starts, seed)
    n_s = len(starts)
    y0 = np.tile(starts, (n_cells, 1))
    roots, res = _newton_sl4_batch(y0, np.repeat(a_flat, n_s), np.repeat(b_flat, n_s), params)

    stable_count = np.zeros((resolution, resolution), dtype=int)
    ok = res <= 1e-10
    g_all = 1.0 - roots.sum(axis=-1)
    feasible = ok & (roots.min(axis=-1) > -1e-8) & (g_all > -1e-8) & (roots.max(axis=-1) < 1 + 1e-8)

    # eigenvalues for every feasible root, then dedup per cell
    eigs = np.full((len(roots), 3), np.nan, dtype=complex)
    idx_feasible = np.flatnonzero(feasible)
    if len(idx_feasible):
        jac = np.empty((len(idx_feasible), 3, 3))
        sel = roots[idx_feasible]
        al = np.repeat(a_flat, n_s)[idx_feasible]
        be = np.repeat(b_flat, n_s)[idx_feasible]
        for j in range(3):
            up = sel.copy()
            dn = sel.copy()
            up[:, j] += FD_STEP
            dn[:, j] -= FD_STEP
            jac[:, :, j] = (sl4_reduced_rates(up, al, be, params)
                            - sl4_reduced_rates(dn, al, be, params)) / (2.0 * FD_STEP)
        eigs[idx_feasible] = np.linalg.eigvals(jac)

    for cell in range(n_cells):
        seen: list[np.ndarray] = []
        count = 0
        for s in range(n_s):
            k = cell * n_s + s
            if not feasible[k]:
                continue
            y = roots[k]
            if any(float(np.max(np.abs(y - v))) < DEDUP_TOL for v in seen):
                continue
            seen.append(y)
            if float(np.max(eigs[k].real)) < -EIG_TOL:
                count += 1
        stable_count[cell // resolution, cell % resolution] = count

    # oscillation scan: batched forward Euler from the fixed starts
    n_steps = int(round(t_end / h))
    w1_start = int(0.6 * n_steps)
    w2_start = int(0.8 * n_steps)
    state = np.repeat(OSC_STARTS[None, :, :], n_cells, axis=0).reshape(-1, 4)
    al = np.repeat(a_flat, len(OSC_STARTS))
    be = np.repeat(b_flat, len(OSC_STARTS))
    g_min1 = np.full(len(state), np.inf)
    g_max1 = np.full(len(state), -np.inf)
    g_min2 = np.full(len(state), np.inf)
    g_max2 = np.full(len(state), -np.inf)
    for step in range(1, n_steps + 1):
        g, s, t, f_ = state.T
        rates = np.stack(_sl4_rates(g, s, t, f_, g, t, f_, al, be, params), axis=-1)
        state = state + h * rates
        if step >= w1_start:
            g_now = state[:, 0]
            if step < w2_start:
                np.minimum(g_min1, g_now, out=g_min1)
                np.maximum(g_max1, g_now, out=g_max1)
            else:
                np.minimum(g_min2, g_now, out=g_min2)
                np.maximum(g_max2, g_now, out=g_max2)
    ptp1 = g_max1 - g_min1
    ptp2 = g_max2 - g_min2
    osc = (np.minimum(ptp1, ptp2) > OSC_AMPLITUDE).reshape(n_cells, len(OSC_STARTS)).any(axis=1)
    return TwoParamMap(alphas, betas, stable_count, osc.reshape(resolution, resolution))


# ---------------------------------------------------------------------------
# Spatial steady states.
# ---------------------------------------------------------------------------

@dataclass
class SpatialSteadyState:
    fields: np.ndarray
    l1_grass: float
    stable: bool | None
    residual: float


@dataclass(frozen=True)
class SpatialSystem:
    """A discretized model: pointwise rates plus a flattened batched variant."""

    rhs: Callable[[np.ndarray], np.ndarray]
    rhs_flat: Callable[[np.ndarray], np.ndarray]
    grid: Grid1D
    n_fields: int  # 1 for the scalar model, 4 for the full model


def build_grassforest_spatial(grid: Grid1D, sigma: float, alpha_gradient,
                              bc: BoundaryCondition = BoundaryCondition.REFLECTING,
                              phi=None) -> SpatialSystem:
    """Discretized grass-forest model with equal fire and seed kernels."""
    if phi is None:
        phi = forest_mortality_response()
    conv = build_convolution(grid, GaussianKernel(sigma), bc)
    alpha_field = evaluate_gradient(alpha_gradient, grid)
    mat = conv.matrix

    def rhs_flat(g):
        af = alpha_field if g.ndim == 1 else alpha_field[:, None]
        wg = mat @ g
        return phi(wg) * (1.0 - g) - af * g * (1.0 - wg)

    return SpatialSystem(rhs_flat, rhs_flat, grid, 1)


def build_sl4_spatial(grid: Grid1D, params: SLParams) -> SpatialSystem:
    """Discretized four-type model; kernels and gradients come from ``params``."""
    conv_w = build_convolution(grid, GaussianKernel(params.sigma_w), params.bc)
    conv_t = (conv_w if params.sigma_t == params.sigma_w
              else build_convolution(grid, GaussianKernel(params.sigma_t), params.bc))
    conv_f = (conv_w if params.sigma_f == params.sigma_w
              else build_convolution(grid, GaussianKernel(params.sigma_f), params.bc))
    alpha_field = evaluate_gradient(params.alpha, grid)
    beta_field = evaluate_gradient(params.beta, grid)
    n = grid.n

    def rates(g, s, t, f_):
        batched = g.ndim > 1
        al = alpha_field[:, None] if batched else alpha_field
        be = beta_field[:, None] if batched else beta_field
        return _sl4_rates(g, s, t, f_, conv_w.matrix @ g, conv_t.matrix @ t,
                          conv_f.matrix @ f_, al, be, params)

    def rhs(state):
        dg, ds, dt, df = rates(state[0], state[1], state[2], state[3])
        return np.stack([dg, ds, dt, df], axis=0)

    def rhs_flat(z):
        # reduced stacked coordinates (S, T, F); G from the simplex constraint
        s, t, f_ = z[:n], z[n:2 * n], z[2 * n:]
        g = 1.0 - s - t - f_
        _, ds, dt, df = rates(g, s, t, f_)
        return np.concatenate([ds, dt, df], axis=0)

    return SpatialSystem(rhs, rhs_flat, grid, 4)


def _reduce(state: np.ndarray) -> np.ndarray:
    return np.concatenate([state[1], state[2], state[3]])


def _expand(z: np.ndarray, n: int) -> np.ndarray:
    s, t, f_ = z[:n], z[n:2 * n], z[2 * n:]
    return np.stack([1.0 - s - t - f_, s, t, f_], axis=0)


def _spatial_newton(system: SpatialSystem, state, tol, max_iter=15):
    """Newton on the flattened unknowns with a batched finite-difference Jacobian."""
    n = system.grid.n
    reduced = system.n_fields == 4
    z = _reduce(state) if reduced else np.array(state, dtype=float)
    dim = len(z)
    eps = 1e-7
    for _ in range(max_iter):
        f0 = system.rhs_flat(z)
        res = float(np.max(np.abs(f0)))
        if res <= tol:
            break
        zmat = z[:, None] + eps * np.eye(dim)
        jac = (system.rhs_flat(zmat) - f0[:, None]) / eps
        try:
            delta = np.linalg.solve(jac, f0)
        except np.linalg.LinAlgError:
            break
        norm0 = float(f0 @ f0)
        lam = 1.0
        while lam > 2 ** -10:
            z_try = z - lam * delta
            f_try = system.rhs_flat(z_try)
            if float(f_try @ f_try) < norm0:
                z = z_try
                break
            lam *= 0.5
        else:
            break
    state_out = _expand(z, n) if reduced else z
    return state_out, float(np.max(np.abs(system.rhs(state_out))))


def _perturbed(state: np.ndarray, amplitude: float, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    if state.ndim == 1:
        return np.clip(state + rng.uniform(-amplitude, amplitude, state.shape), 0.0, 1.0)
    # mix toward a random simplex state: stays exactly on the simplex
    noise = rng.dirichlet(np.ones(4), size=state.shape[1]).T
    return (1.0 - amplitude) * state + amplitude * noise


def integration_stable(system: SpatialSystem, state: np.ndarray, *,
                       amplitude: float = 1e-3, t_end: float = 200.0,
                       h: float = 0.05, return_tol: float = 1e-4,
                       seed: int = 0) -> bool:
    """Integration-based stability: perturb, integrate, test return."""
    try:
        run = euler_simulate(system.rhs, _perturbed(state, amplitude, seed), h, t_end,
                             snapshot_stride=10 ** 9)
    except HeterosimError:
        return False
    return float(np.max(np.abs(run.final_state - state))) <= return_tol


def spatial_steady_state(system: SpatialSystem, guess: np.ndarray,
                         method: str = "auto", *, tol: float = 1e-9,
                         max_iterations: int = 100_000, tau: float = 0.5,
                         check_stability: bool = True,
                         stability_seed: int = 0) -> SpatialSteadyState:
    """Converge a steady state of the discretized model from a guess field.

    ``fixedpoint`` damps the state by ``tau`` times the rates (with ``tau``
    adapted downward if the residual grows), ``newton`` solves the flattened
    root problem with a finite-difference Jacobian, and ``auto`` runs the
    fixed-point pass to moderate accuracy before polishing with Newton.
    Stability is decided by time integration of a perturbed copy rather than
    by the spectrum of the discretized operator.
    """
    if method not in ("auto", "fixedpoint", "newton"):
        raise ValueError(f"unknown method {method!r}")
    state = np.array(guess, dtype=float)
    best = float(np.max(np.abs(system.rhs(state))))

    if method in ("auto", "fixedpoint"):
        fp_target = 1e-6 if method == "auto" else tol
        step = tau
        prev_res = best
        stall = 0
        for it in range(max_iterations):
            rates = system.rhs(state)
            res = float(np.max(np.abs(rates)))
            best = min(best, res)
            if res <= fp_target:
                break
            if it % 50 == 49:
                if res > prev_res:
                    stall += 1
                    if stall >= 2:
                        step = max(step * 0.5, 1.0 / 64.0)
                        stall = 0
                else:
                    stall = 0
                prev_res = res
            state = state + step * rates
            if not np.all(np.isfinite(state)):
                raise NoSteadyStateError("fixed-point iteration diverged", best)
        else:
            raise NoSteadyStateError(
                f"no steady state after {max_iterations} iterations", best)

    if method in ("auto", "newton"):
        state, res = _spatial_newton(system, state, tol)
    else:
        res = float(np.max(np.abs(system.rhs(state))))
    if res > tol:
        raise NoSteadyStateError(f"residual {res:.2e} above {tol:.1e}", min(best, res))

    grass = state if state.ndim == 1 else state[0]
    l1 = float(np.trapezoid(np.abs(grass), system.grid.nodes))
    stable = None
    if check_stability:
        stable = integration_stable(system, state, seed=stability_seed)
    return SpatialSteadyState(fields=state, l1_grass=l1, stable=stable, residual=res)


# ---------------------------------------------------------------------------
# Dispersal sweep with branch matching.
# ---------------------------------------------------------------------------

def _field_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm((a - b).ravel()))


@dataclass
class _Track:
    states: list[np.ndarray]
    sigmas: list[float]
    points: list[EquilibriumPoint]
    events: list[BranchEvent] = field(default_factory=list)
    active: bool = True
    born_at_first_sigma: bool = True


def _converge_at(sigma, state, alpha_gradient, grid, bc, phi, tol=1e-9):
    system = build_grassforest_spatial(grid, sigma, alpha_gradient, bc, phi)
    try:
        sol = spatial_steady_state(system, state, "auto", tol=tol, check_stability=False,
                                   max_iterations=40_000)
    except (NoSteadyStateError, HeterosimError):
        return None, system
    return sol, system


def sweep_dispersal(sigma_values, ic_ensemble, alpha_gradient, grid: Grid1D, *,
                    bc: BoundaryCondition = BoundaryCondition.REFLECTING,
                    phi=None, relax_time: float = 150.0, h: float = 0.05,
                    match_threshold: float | None = None,
                    fold_tol: float = 5e-4, check_stability: bool = True) -> list[Branch]:
    """Steady-state branches of the grass-forest model over the dispersal scale.

    At each dispersal value the ensemble initial conditions are relaxed by
    time integration and converged to steady states, alongside natural
    continuation of every branch found at the previous value.  States are
    matched to branches by nearest field distance; when a branch appears or
    disappears between two dispersal values the edge is refined by bisection
    and labeled a saddle-node if the lost state's basin has vanished.
    The reported scalar per point is the L1 norm of the grass component.
    """
    sigmas = sorted(float(s) for s in sigma_values)
    if match_threshold is None:
        match_threshold = 0.2 * np.sqrt(grid.n)
    tracks: list[_Track] = []

    def make_point(sol, sigma):
        return EquilibriumPoint(
            state=sol.fields, parameter=sigma, eigenvalues=np.array([]),
            stability=(Stability.STABLE if sol.stable else Stability.UNSTABLE)
            if sol.stable is not None else Stability.MARGINAL,
            residual=sol.residual,
        )

    for si, sigma in enumerate(sigmas):
        system = build_grassforest_spatial(grid, sigma, alpha_gradient, bc, phi)
        candidates: list[tuple[np.ndarray, _Track | None]] = []
        for track in tracks:
            if track.active:
                candidates.append((track.states[-1], track))
        for ic in ic_ensemble:
            run = euler_simulate(system.rhs, np.asarray(ic, dtype=float), h, relax_time,
                                 snapshot_stride=10 ** 9)
            candidates.append((run.final_state, None))

        converged: list[tuple[np.ndarray, float, _Track | None]] = []
        for state0, origin in candidates:
            try:
                sol = spatial_steady_state(system, state0, "auto", check_stability=False,
                                           max_iterations=40_000)
            except (NoSteadyStateError, HeterosimError):
                continue
            if any(_field_distance(sol.fields, c[0]) < match_threshold for c in converged):
                continue
            converged.append((sol.fields, sol.residual, origin))

        extended = set()
        for fields, residual, origin in converged:
            target = None
            dists = [
                (_field_distance(fields, t.states[-1]), t)
                for t in tracks if t.active and id(t) not in extended
            ]
            dists = [dv for dv in dists if dv[0] < match_threshold]
            if dists:
                target = min(dists, key=lambda dv: dv[0])[1]
            if target is None:
                target = _Track(states=[], sigmas=[], points=[],
                                born_at_first_sigma=(si == 0))
                tracks.append(target)
            extended.add(id(target))
            stable = integration_stable(system, fields) if check_stability else None
            sol = SpatialSteadyState(fields, float(np.trapezoid(np.abs(fields), grid.nodes)),
                                     stable, residual)
            target.states.append(fields)
            target.sigmas.append(sigma)
            target.points.append(make_point(sol, sigma))

        for track in tracks:
            if track.active and id(track) not in extended and track.sigmas:
                # branch lost between the previous value and this one
                lost_edge = _refine_edge(track.states[-1], track.sigmas[-1], sigma,
                                         alpha_gradient, grid, bc, phi,
                                         match_threshold, fold_tol)
                kind = _termination_kind(track.states[-1], sigma, alpha_gradient,
                                         grid, bc, phi, match_threshold, h)
                track.active = False
                track.events.append(BranchEvent(index=len(track.points) - 1,
                                                kind=kind, parameter=lost_edge))

    branches = []
    for track in tracks:
        events = list(track.events)
        if not track.born_at_first_sigma and track.sigmas:
            # refine the birth edge downward
            lo_idx = sigmas.index(track.sigmas[0])
            sigma_bad = sigmas[lo_idx - 1] if lo_idx > 0 else track.sigmas[0]
            if lo_idx > 0:
                edge = _refine_edge(track.states[0], track.sigmas[0], sigma_bad,
                                    alpha_gradient, grid, bc, phi,
                                    match_threshold, fold_tol)
                events.insert(0, BranchEvent(index=0, kind=EventKind.SADDLE_NODE,
                                             parameter=edge))
        branches.append(Branch(points=track.points, events=events))
    return branches


def _refine_edge(state, sigma_good, sigma_bad, alpha_gradient, grid, bc, phi,
                 match_threshold, tol):
    """Bisect the dispersal value where continuation of ``state`` stops working."""
    good, bad = sigma_good, sigma_bad
    base = state
    while abs(bad - good) > tol:
        mid = 0.5 * (good + bad)
        sol, _ = _converge_at(mid, base, alpha_gradient, grid, bc, phi)
        if sol is not None and _field_distance(sol.fields, base) < match_threshold:
            good = mid
            base = sol.fields
        else:
            bad = mid
    return 0.5 * (good + bad)


def _termination_kind(state, sigma_bad, alpha_gradient, grid, bc, phi,
                      match_threshold, h):
    """Distinguish a vanished basin (saddle-node) from plain corrector failure."""
    system = build_grassforest_spatial(grid, sigma_bad, alpha_gradient, bc, phi)
    try:
        run = euler_simulate(system.rhs, state, h, 200.0, snapshot_stride=10 ** 9)
    except HeterosimError:
        return EventKind.BRANCH_END
    moved = _field_distance(run.final_state, state)
    return EventKind.SADDLE_NODE if moved > match_threshold else EventKind.BRANCH_END
