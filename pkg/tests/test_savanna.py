"""Vegetation dynamics: rate functions, conservation, time stepping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heterosim.errors import BlowupError, FieldBoundsError
from heterosim.gradients import LinearGradient
from heterosim.grids import BoundaryCondition, GaussianKernel, Grid1D, build_convolution
from heterosim.savanna import (
    SLParams,
    euler_simulate,
    ic_forest_seed,
    ic_ramp,
    ic_random_simplex,
    ic_uniform,
    rhs_grassforest_nonspatial,
    rhs_grassforest_spatial,
    rhs_sl4_nonspatial,
    rhs_sl4_spatial,
)

PHI_AT_ZERO = 0.1 + 0.8 / (1.0 + math.exp(8.0))  # = phi(0), exp(8) tail

simplex_states = st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4).map(
    lambda v: np.array(v) / np.sum(v)
)


class TestGrassForestRates:
    def test_all_grass_is_equilibrium(self):
        for alpha in (0.0, 0.5, 1.75, 3.0):
            assert rhs_grassforest_nonspatial(1.0, alpha) == 0.0

    def test_bare_state_rate_is_base_mortality(self):
        assert rhs_grassforest_nonspatial(0.0, 0.7) == pytest.approx(
            PHI_AT_ZERO, rel=1e-14)

    def test_sigmoid_midpoint_balance(self):
        # at the threshold, phi(0.4) = 0.5 equals alpha * G for alpha = 1.25
        assert rhs_grassforest_nonspatial(0.4, 1.25) == pytest.approx(0.0, abs=1e-15)


class TestFourTypeRates:
    def test_all_grass_is_equilibrium(self):
        rates = rhs_sl4_nonspatial(np.array([1.0, 0.0, 0.0, 0.0]), 0.9, 0.3)
        assert np.all(rates == 0.0)

    def test_all_forest_decays_by_fire_mortality(self):
        rates = rhs_sl4_nonspatial(np.array([0.0, 0.0, 0.0, 1.0]), 0.9, 0.3)
        assert rates[3] == pytest.approx(-PHI_AT_ZERO, rel=1e-14)
        assert rates[0] == pytest.approx(PHI_AT_ZERO, rel=1e-14)
        assert rates[1] == rates[2] == 0.0

    @settings(max_examples=100)
    @given(simplex_states, st.floats(0.0, 2.5), st.floats(0.0, 2.5))
    def test_rates_conserve_total_cover(self, state, alpha, beta):
        rates = rhs_sl4_nonspatial(state, alpha, beta)
        assert abs(float(rates.sum())) <= 1e-14

    def test_rejects_off_simplex_state(self):
        with pytest.raises(ValueError):
            rhs_sl4_nonspatial(np.array([0.5, 0.5, 0.5, 0.5]), 1.0, 1.0)
        with pytest.raises(ValueError):
            rhs_sl4_nonspatial(np.array([1.2, -0.2, 0.0, 0.0]), 1.0, 1.0)


@pytest.fixture(scope="module")
def small_grid():
    return Grid1D(0.0, 1.0, 200)


@pytest.fixture(scope="module")
def reflecting_conv(small_grid):
    return build_convolution(small_grid, GaussianKernel(2.0 * small_grid.spacing),
                             BoundaryCondition.REFLECTING)


class TestSpatialRates:
    def test_all_grass_field_is_steady(self, small_grid, reflecting_conv):
        g = np.ones(small_grid.n)
        alpha = np.full(small_grid.n, 1.2)
        rates = rhs_grassforest_spatial(g, reflecting_conv, reflecting_conv, alpha)
        assert np.max(np.abs(rates)) <= 1e-14

    def test_bare_field_rate(self, small_grid, reflecting_conv):
        g = np.zeros(small_grid.n)
        alpha = np.full(small_grid.n, 1.2)
        rates = rhs_grassforest_spatial(g, reflecting_conv, reflecting_conv, alpha)
        assert np.max(np.abs(rates - PHI_AT_ZERO)) <= 1e-12

    def test_narrow_kernel_matches_local_rates(self, small_grid, reflecting_conv):
        # cosine profile is smooth under the reflecting extension, so a
        # two-spacing kernel is already close to the identity on it
        g = 0.4 + 0.0002 * np.cos(np.pi * small_grid.nodes)
        alpha = 0.5 + 1.25 * small_grid.nodes
        spatial = rhs_grassforest_spatial(g, reflecting_conv, reflecting_conv, alpha)
        local = rhs_grassforest_nonspatial(g, alpha)
        assert np.max(np.abs(spatial - local)) <= 1e-6

    def test_four_type_matches_local_rates(self, small_grid, reflecting_conv):
        x = small_grid.nodes
        wiggle = 0.0002 * np.cos(np.pi * x)
        state = np.stack([
            0.4 + wiggle, 0.2 - wiggle, np.full_like(x, 0.25), np.full_like(x, 0.15),
        ])
        alpha = 0.8 + 0.5 * x
        beta = 0.15 + 0.1 * x
        spatial = rhs_sl4_spatial(state, reflecting_conv, reflecting_conv,
                                  reflecting_conv, alpha, beta)
        local = rhs_sl4_nonspatial(np.moveaxis(state, 0, -1), alpha, beta)
        assert np.max(np.abs(spatial - np.moveaxis(local, -1, 0))) <= 1e-6

    def test_pointwise_conservation_random_fields(self, small_grid, reflecting_conv):
        rng = np.random.Generator(np.random.Philox(1))
        alpha = np.full(small_grid.n, 1.0)
        beta = np.full(small_grid.n, 0.5)
        for _ in range(20):
            state = rng.dirichlet(np.ones(4), size=small_grid.n).T
            rates = rhs_sl4_spatial(state, reflecting_conv, reflecting_conv,
                                    reflecting_conv, alpha, beta)
            assert np.max(np.abs(rates.sum(axis=0))) <= 1e-14

    def test_grid_mismatch_rejected(self, small_grid, reflecting_conv):
        other = Grid1D(0.0, 1.0, 100)
        conv_other = build_convolution(other, GaussianKernel(0.02),
                                       BoundaryCondition.REFLECTING)
        with pytest.raises(ValueError):
            rhs_grassforest_spatial(np.ones(200), reflecting_conv, conv_other,
                                    np.ones(200))


class TestEulerSimulate:
    def test_zero_rhs_keeps_state(self):
        run = euler_simulate(lambda y: np.zeros_like(y), np.array([0.3, 0.7]),
                             h=0.05, t_end=1.0, bounds=None)
        assert np.all(run.snapshots == np.array([0.3, 0.7]))

    def test_grass_dominated_monotone_recovery(self):
        # oracle: dense sign scan shows the rate is positive on [0.99, 1)
        alpha = 0.5
        gs = np.linspace(0.99, 1.0 - 1e-9, 2000)
        assert np.all(rhs_grassforest_nonspatial(gs, alpha) > 0)
        run = euler_simulate(lambda y: rhs_grassforest_nonspatial(y, alpha),
                             np.array([0.99]), h=0.05, t_end=200.0)
        traj = run.snapshots[:, 0]
        assert np.all(np.diff(traj) >= 0)
        assert traj[-1] == pytest.approx(1.0, abs=1e-4)

    def test_first_order_convergence(self):
        # Richardson triple on the local four-type system over T = 10
        state0 = np.array([0.4, 0.2, 0.25, 0.15])
        rhs = lambda y: rhs_sl4_nonspatial(y, 1.0, 0.5)
        finals = {}
        for h in (0.04, 0.02, 0.01):
            run = euler_simulate(rhs, state0, h=h, t_end=10.0, snapshot_stride=10 ** 9)
            finals[h] = run.final_state
        d1 = np.max(np.abs(finals[0.04] - finals[0.02]))
        d2 = np.max(np.abs(finals[0.02] - finals[0.01]))
        order = math.log2(d1 / d2)
        assert 0.9 <= order <= 1.1

    def test_simplex_drift_stays_tiny(self):
        state0 = np.array([0.4, 0.2, 0.25, 0.15])
        run = euler_simulate(lambda y: rhs_sl4_nonspatial(y, 1.1, 0.6), state0,
                             h=0.05, t_end=500.0, snapshot_stride=10 ** 9,
                             track_simplex=True)
        assert run.manifest["max_simplex_drift"] <= 1e-10

    def test_bounds_violation_aborts(self):
        with pytest.raises(FieldBoundsError):
            euler_simulate(lambda y: -np.ones_like(y), np.array([0.01]),
                           h=0.05, t_end=2.0)

    def test_blowup_aborts_with_last_time(self):
        with pytest.raises(BlowupError) as err, np.errstate(over="ignore"):
            euler_simulate(lambda y: y * 1e8, np.array([1.0]), h=0.1, t_end=10.0,
                           bounds=None)
        assert err.value.last_valid_time >= 0.0

    def test_step_size_cap(self):
        with pytest.raises(ValueError):
            euler_simulate(lambda y: y, np.array([0.1]), h=0.2, t_end=1.0)

    def test_snapshot_times_strictly_increasing(self):
        run = euler_simulate(lambda y: np.zeros_like(y), np.array([0.5]),
                             h=0.05, t_end=1.0, snapshot_stride=7)
        assert np.all(np.diff(run.times) > 0)
        assert run.times[-1] == pytest.approx(1.0)

    def test_reflection_symmetry_of_trajectories(self):
        # constant rates plus mirrorter-symmetric operators commute with reversal
        grid = Grid1D(0.0, 1.0, 120)
        conv = build_convolution(grid, GaussianKernel(0.03),
                                 BoundaryCondition.REFLECTING)
        params = SLParams(alpha=LinearGradient(1.0, 0.0), beta=LinearGradient(0.5, 0.0))
        alpha = np.full(grid.n, 1.0)
        beta = np.full(grid.n, 0.5)

        def rhs(state):
            return rhs_sl4_spatial(state, conv, conv, conv, alpha, beta, params)

        ic = ic_forest_seed(grid, center=0.3, width=0.1)
        fwd = euler_simulate(rhs, ic, h=0.05, t_end=10.0, snapshot_stride=10 ** 9)
        mirrored = euler_simulate(rhs, ic[:, ::-1].copy(), h=0.05, t_end=10.0,
                                  snapshot_stride=10 ** 9)
        assert np.max(np.abs(fwd.final_state[:, ::-1] - mirrored.final_state)) <= 1e-10


class TestInitialConditions:
    def test_uniform_on_simplex(self):
        grid = Grid1D(0.0, 1.0, 50)
        state = ic_uniform(grid, (0.25, 0.25, 0.25, 0.25))
        assert np.max(np.abs(state.sum(axis=0) - 1.0)) <= 1e-12

    def test_uniform_rejects_off_simplex(self):
        grid = Grid1D(0.0, 1.0, 50)
        with pytest.raises(ValueError):
            ic_uniform(grid, (0.5, 0.5, 0.5, 0.5))

    def test_ramp_stays_on_simplex(self):
        grid = Grid1D(0.0, 1.0, 50)
        state = ic_ramp(grid, (1.0, 0.0, 0.0, 0.0), (0.1, 0.2, 0.3, 0.4))
        assert np.max(np.abs(state.sum(axis=0) - 1.0)) <= 1e-12

    def test_forest_seed_shape(self):
        grid = Grid1D(0.0, 1.0, 400)
        state = ic_forest_seed(grid, center=0.5, width=0.05)
        assert np.max(np.abs(state.sum(axis=0) - 1.0)) <= 1e-12
        in_pulse = np.abs(grid.nodes - 0.5) <= 0.025
        assert np.all(state[3][in_pulse] > 0.9)
        assert np.all(state[3][~in_pulse] == 0.0)

    def test_random_simplex_seeded(self):
        grid = Grid1D(0.0, 1.0, 64)
        a = ic_random_simplex(grid, seed=9)
        b = ic_random_simplex(grid, seed=9)
        assert np.array_equal(a, b)
        assert np.max(np.abs(a.sum(axis=0) - 1.0)) <= 1e-12
        assert a.min() >= 0.0
