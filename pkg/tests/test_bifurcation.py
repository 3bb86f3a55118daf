"""Equilibrium finding, continuation, regime scan and spatial steady states."""

import numpy as np
import pytest

from heterosim.bifurcation import (
    EventKind,
    Stability,
    build_grassforest_spatial,
    build_sl4_spatial,
    continue_branch,
    find_equilibria,
    grassforest_bistable_interval,
    grassforest_system,
    integration_stable,
    scan_two_parameter,
    sl4_system,
    spatial_steady_state,
    sweep_dispersal,
)
from heterosim.diagnostics import locate_front
from heterosim.errors import BlowupError, NoSteadyStateError
from heterosim.gradients import LinearGradient, forest_mortality_response
from heterosim.grids import Grid1D
from heterosim.savanna import SLParams, euler_simulate, ic_grass_with_forest_seed, ic_uniform

FIG1_ALPHA = LinearGradient(0.5, 1.25)


def bisect_root(fn, lo, hi, tol=1e-12):
    """Independent bisection oracle for scalar roots (bracket in either order)."""
    f_lo = fn(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if abs(hi - lo) < tol:
            break
    return 0.5 * (lo + hi)


class TestFindEquilibria:
    def test_grass_only_regime(self):
        # oracle: dense sign scan shows no interior roots at alpha = 0.5
        system = grassforest_system(FIG1_ALPHA)
        phi = forest_mortality_response()
        gs = np.linspace(1e-6, 1.0 - 1e-6, 20000)
        signs = np.sign(phi(gs) - 0.5 * gs)
        assert np.all(signs > 0)
        eqs = find_equilibria(system, 0.0)
        assert len(eqs) == 1
        assert eqs[0].state[0] == pytest.approx(1.0, abs=1e-12)
        assert eqs[0].stability is Stability.STABLE

    def test_forest_regime_root_location(self):
        # oracle: bisection on phi(G) - 1.75 G for the low-grass root
        system = grassforest_system(FIG1_ALPHA)
        phi = forest_mortality_response()
        root = bisect_root(lambda g: phi(g) - 1.75 * g, 1e-6, 0.3)
        assert 0.05 < root < 0.07
        eqs = find_equilibria(system, 1.0)  # alpha(1) = 1.75
        low = min(eqs, key=lambda q: q.state[0])
        assert low.state[0] == pytest.approx(root, abs=1e-8)
        assert low.stability is Stability.STABLE
        assert any(abs(q.state[0] - 1.0) < 1e-12 and q.stability is Stability.UNSTABLE
                   for q in eqs)

    def test_four_type_contains_all_grass(self):
        params = SLParams(alpha=LinearGradient(0.8, 0.5), beta=LinearGradient(0.15, 0.1))
        system = sl4_system(params.alpha, params.beta, params)
        for x in (0.0, 0.37, 0.81, 1.0):
            eqs = find_equilibria(system, x, n_starts=25)
            assert any(np.allclose(q.state, [1, 0, 0, 0], atol=1e-10) for q in eqs)

    def test_residuals_verified_independently(self):
        params = SLParams(alpha=LinearGradient(0.8, 0.5), beta=LinearGradient(0.15, 0.1))
        system = sl4_system(params.alpha, params.beta, params)
        for eq in find_equilibria(system, 0.5, n_starts=25):
            res = np.max(np.abs(system.f(system.project(eq.state), 0.5)))
            assert res <= 1e-10

    def test_too_few_starts_rejected(self):
        with pytest.raises(ValueError):
            find_equilibria(grassforest_system(FIG1_ALPHA), 0.5, n_starts=10)

    def test_deterministic(self):
        system = grassforest_system(FIG1_ALPHA)
        a = find_equilibria(system, 0.42, seed=3)
        b = find_equilibria(system, 0.42, seed=3)
        assert [tuple(q.state) for q in a] == [tuple(q.state) for q in b]


class TestContinueBranch:
    def test_flat_branch_no_events(self):
        system = grassforest_system(LinearGradient(0.5, 0.0))  # no gradient
        start = find_equilibria(system, 0.0)[0]
        branch = continue_branch(system, (0.0, 1.0), start)
        states = np.array([p.state[0] for p in branch.points])
        assert np.max(np.abs(states - states[0])) <= 1e-10
        assert branch.events == []

    def test_all_grass_branch_exact_with_transcritical(self):
        system = grassforest_system(FIG1_ALPHA)
        start = next(q for q in find_equilibria(system, 0.0)
                     if abs(q.state[0] - 1.0) < 1e-12)
        branch = continue_branch(system, (0.0, 1.0), start)
        assert np.max(np.abs(np.array([p.state[0] for p in branch.points]) - 1.0)) == 0.0
        trans = branch.events_of(EventKind.TRANSCRITICAL)
        # exchange where alpha(x) = phi(1):  x = (phi(1) - 0.5) / 1.25
        phi1 = forest_mortality_response()(1.0)
        expected = (phi1 - 0.5) / 1.25
        assert len(trans) == 1
        assert trans[0].parameter == pytest.approx(expected, abs=1e-4)

    def test_bistable_interval_against_scan_oracle(self):
        (lo, hi), _, _ = grassforest_bistable_interval(FIG1_ALPHA)
        assert 0.0 < lo < hi < 1.0

        # oracle: count stable roots by dense sign scan of the rate function
        phi = forest_mortality_response()
        gs = np.linspace(1e-9, 1.0, 30000)

        def n_stable(x):
            vals = phi(gs) - FIG1_ALPHA(x) * gs
            crossings = np.flatnonzero(np.diff(np.sign(vals)) != 0)
            down = sum(1 for i in crossings if vals[i] > vals[i + 1])
            if FIG1_ALPHA(x) < phi(1.0):  # the all-grass state counts when attracting
                down += 1
            return down

        def oracle_edge(x_out, x_in):
            return bisect_root(lambda x: 1.0 if n_stable(x) >= 2 else -1.0,
                               x_out, x_in, tol=1e-6)

        assert n_stable(0.5) >= 2
        assert n_stable(0.001) == 1
        assert n_stable(0.999) == 1
        assert lo == pytest.approx(oracle_edge(0.001, 0.5), abs=1e-3)
        assert hi == pytest.approx(oracle_edge(0.999, 0.5), abs=1e-3)

    def test_fold_stable_under_step_halving(self):
        system = grassforest_system(FIG1_ALPHA)
        eqs = find_equilibria(system, 1.0)
        start = min(eqs, key=lambda q: q.state[0])
        folds = []
        for step in (1e-3, 5e-4):
            branch = continue_branch(system, (0.0, 1.0), start, initial_step=step,
                                     max_step=5e-3 * 0.5)
            saddle = branch.events_of(EventKind.SADDLE_NODE)
            folds.append(min(ev.parameter for ev in saddle))
        assert abs(folds[0] - folds[1]) < 1e-4

    def test_unconverged_start_rejected(self):
        system = grassforest_system(FIG1_ALPHA)
        eq = find_equilibria(system, 0.5)[0]
        eq.state = eq.state + 0.1
        with pytest.raises(ValueError):
            continue_branch(system, (0.0, 1.0), eq)

    def test_four_type_transcritical_near_band_onset(self):
        params = SLParams(alpha=LinearGradient(0.8, 0.5), beta=LinearGradient(0.15, 0.1))
        system = sl4_system(params.alpha, params.beta, params)
        start = next(q for q in find_equilibria(system, 0.0, n_starts=40)
                     if q.stability is Stability.STABLE and q.state[2] > 0.2)
        branch = continue_branch(system, (0.0, 1.0), start)
        trans = branch.events_of(EventKind.TRANSCRITICAL)
        assert trans, "savanna branch should exchange stability along the gradient"
        assert any(0.2 < ev.parameter < 0.6 for ev in trans)

    def test_stability_labels_match_simulation(self):
        # integrate a small perturbation from each labeled equilibrium
        params = SLParams(alpha=LinearGradient(0.8, 0.5), beta=LinearGradient(0.15, 0.1))
        system = sl4_system(params.alpha, params.beta, params)
        for eq in find_equilibria(system, 0.5, n_starts=25):
            if eq.stability is Stability.MARGINAL:
                continue
            y0 = system.project(eq.state)
            rng = np.random.Generator(np.random.Philox(0))
            pert = rng.uniform(-1e-4, 1e-4, 3)
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    run = euler_simulate(lambda y: system.f(y, 0.5), y0 + pert,
                                         h=0.02, t_end=100.0,
                                         snapshot_stride=10 ** 9, bounds=None)
                dist = float(np.max(np.abs(run.final_state - y0)))
            except BlowupError:
                dist = np.inf  # left the simplex entirely; definitely departed
            if eq.stability is Stability.STABLE:
                assert dist <= 1e-3
            else:
                assert dist > 1e-2


class TestScanTwoParameter:
    @pytest.fixture(scope="class")
    def wave_window(self):
        return scan_two_parameter((0.2, 1.0), (1.85, 2.0), 50, t_end=400.0)

    def test_oscillation_region_intersected(self, wave_window):
        assert wave_window.oscillating.any()

    def test_resolution_precondition(self):
        with pytest.raises(ValueError):
            scan_two_parameter((0.0, 1.0), (0.0, 1.0), 10)

    def test_forest_corner_single_stable(self):
        result = scan_two_parameter((1.9, 2.0), (0.05, 0.15), 50, t_end=100.0)
        assert result.stable_count.min() >= 1
        # spot-check the corner cell with a direct equilibrium count
        system = sl4_system(lambda x: 2.0, lambda x: 0.1, SLParams())
        eqs = [q for q in find_equilibria(system, 0.0, n_starts=30)
               if q.stability is Stability.STABLE]
        assert len(eqs) == 1
        assert eqs[0].state[3] > 0.8  # forest dominated

    def test_deterministic_rerun(self, wave_window):
        again = scan_two_parameter((0.2, 1.0), (1.85, 2.0), 50, t_end=400.0)
        assert np.array_equal(again.stable_count, wave_window.stable_count)
        assert np.array_equal(again.oscillating, wave_window.oscillating)


@pytest.fixture(scope="module")
def fig1_system():
    grid = Grid1D(0.0, 1.0, 400)
    return grid, build_grassforest_spatial(grid, 0.01, FIG1_ALPHA)


@pytest.fixture(scope="module")
def fig1_front_state(fig1_system):
    grid, system = fig1_system
    run = euler_simulate(system.rhs, ic_grass_with_forest_seed(grid, 0.95),
                         0.05, 300.0, snapshot_stride=10 ** 9)
    return spatial_steady_state(system, run.final_state, "auto")


class TestSpatialSteadyState:
    def test_all_grass_exact_but_unstable(self, fig1_system):
        # exact up to the one-ulp row normalization of the kernel matrix
        grid, system = fig1_system
        sol = spatial_steady_state(system, np.ones(grid.n), "auto")
        assert sol.residual <= 1e-12
        assert np.max(np.abs(sol.fields - 1.0)) <= 1e-12
        assert sol.stable is False
        assert sol.l1_grass == pytest.approx(1.0, abs=1e-12)

    def test_front_pinned_state(self, fig1_system, fig1_front_state):
        grid, system = fig1_system
        sol = fig1_front_state
        assert sol.residual <= 1e-9
        assert sol.stable is True
        front = locate_front(sol.fields, 0.5, grid)
        (lo, hi), _, _ = grassforest_bistable_interval(FIG1_ALPHA)
        assert lo < front < hi

    def test_front_state_tracks_nonspatial_branches(self, fig1_system, fig1_front_state):
        # away from the front and from the nonspatial exchange point, the
        # profile rides the local stable branches
        grid, system = fig1_system
        sol = fig1_front_state
        front = locate_front(sol.fields, 0.5, grid)
        nonspatial = grassforest_system(FIG1_ALPHA)
        exchange = (forest_mortality_response()(1.0) - 0.5) / 1.25
        worst = 0.0
        for i in range(0, grid.n, 7):
            x = grid.nodes[i]
            if abs(x - front) <= 0.1 or abs(x - exchange) <= 0.1:
                continue
            stable = [q.state[0] for q in find_equilibria(nonspatial, x, n_starts=20)
                      if q.stability is Stability.STABLE]
            pick = max(stable) if x < front else min(stable)
            worst = max(worst, abs(pick - sol.fields[i]))
        assert worst <= 1e-2

    def test_newton_and_fixedpoint_agree(self, fig1_system, fig1_front_state):
        grid, system = fig1_system
        newton = spatial_steady_state(system, fig1_front_state.fields, "newton",
                                      check_stability=False)
        fixed = spatial_steady_state(system, fig1_front_state.fields, "fixedpoint",
                                     check_stability=False, max_iterations=50_000)
        assert np.max(np.abs(newton.fields - fixed.fields)) <= 1e-6

    def test_nonconvergence_reports_best_residual(self, fig1_system):
        grid, system = fig1_system
        with pytest.raises(NoSteadyStateError) as err:
            spatial_steady_state(system, np.full(grid.n, 0.5), "fixedpoint",
                                 max_iterations=5)
        assert err.value.best_residual > 0

    def test_four_type_steady_state_on_simplex(self):
        grid = Grid1D(0.0, 1.0, 200)
        params = SLParams(alpha=LinearGradient(0.8, 0.5),
                          beta=LinearGradient(0.15, 0.1))
        system = build_sl4_spatial(grid, params)
        run = euler_simulate(system.rhs, ic_uniform(grid, (0.1, 0.05, 0.05, 0.8)),
                             0.05, 200.0, snapshot_stride=10 ** 9)
        sol = spatial_steady_state(system, run.final_state, "auto")
        assert sol.residual <= 1e-9
        assert np.max(np.abs(sol.fields.sum(axis=0) - 1.0)) <= 1e-9
        assert sol.stable is True


class TestSweepDispersal:
    @pytest.fixture(scope="class")
    def mini_sweep(self):
        grid = Grid1D(0.0, 1.0, 200)
        ensemble = [np.ones(grid.n), np.full(grid.n, 0.05),
                    np.where(grid.nodes < 0.5, 1.0, 0.05)]
        sigmas = (0.02, 0.03, 0.045, 0.06)
        return grid, sweep_dispersal(sigmas, ensemble, FIG1_ALPHA, grid,
                                     relax_time=120.0)

    def test_all_grass_branch_everywhere_unstable(self, mini_sweep):
        grid, branches = mini_sweep
        all_grass = [b for b in branches
                     if all(float(np.min(p.state)) > 0.99 for p in b.points)]
        assert len(all_grass) == 1
        branch = all_grass[0]
        assert len(branch.points) == 4
        assert all(p.stability is Stability.UNSTABLE for p in branch.points)

    def test_forest_branch_has_low_edge(self, mini_sweep):
        grid, branches = mini_sweep
        forest = [b for b in branches
                  if b.points and float(np.mean(b.points[-1].state)) < 0.2]
        assert forest
        events = [ev for b in forest for ev in b.events]
        assert any(ev.kind is EventKind.SADDLE_NODE for ev in events)

    def test_branch_parameters_sorted(self, mini_sweep):
        grid, branches = mini_sweep
        for b in branches:
            params = b.parameters
            assert np.all(np.diff(params) > 0)

    def test_l1_reported(self, mini_sweep):
        grid, branches = mini_sweep
        for b in branches:
            for p in b.points:
                field = p.state if p.state.ndim == 1 else p.state[0]
                l1 = float(np.trapezoid(np.abs(field), grid.nodes))
                assert 0.0 <= l1 <= 1.0 + 1e-9


def test_integration_stability_helper(fig1_system):
    grid, system = fig1_system
    assert integration_stable(system, np.ones(grid.n)) is False


def test_noisy_gradient_accepted_by_builders():
    # the robustness experiments feed seeded-noise gradients to the builders
    from heterosim.gradients import NoisyGradient

    grid = Grid1D(0.0, 1.0, 120)
    noisy = NoisyGradient(LinearGradient(0.8, 0.5), amplitude=0.02, seed=4)
    system = build_grassforest_spatial(grid, 0.02, noisy)
    rates = system.rhs(np.full(grid.n, 0.5))
    assert rates.shape == (grid.n,)
    params = SLParams(alpha=noisy, beta=LinearGradient(0.15, 0.1), sigma_w=0.02,
                      sigma_f=0.02, sigma_t=0.02)
    system4 = build_sl4_spatial(grid, params)
    rates4 = system4.rhs(ic_uniform(grid, (0.25, 0.25, 0.25, 0.25)))
    assert rates4.shape == (4, grid.n)
    assert np.max(np.abs(rates4.sum(axis=0))) <= 1e-14
