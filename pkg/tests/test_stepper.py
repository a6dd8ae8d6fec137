import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdch import (
    DtUnderflow,
    Field,
    Grid,
    GrowthLaw,
    ModelParams,
    StepConfig,
    advance,
    ch_step,
    initial_state,
    ks_step,
    mobility,
    quadrature,
    simulate,
    stable_dt,
)

from conftest import cosine_field


class TestMobility:
    def test_lower_clamp(self):
        assert mobility(0.05, 0.1) == pytest.approx(0.1)

    def test_identity_branch(self):
        assert mobility(0.5, 0.1) == pytest.approx(0.5)

    def test_upper_clamp(self):
        assert mobility(100.0, 0.1) == pytest.approx(10.0)

    def test_degenerate(self):
        assert mobility(-0.3, 0.0) == 0.0
        assert mobility(0.7, 0.0) == pytest.approx(0.7)

    def test_array_input(self):
        out = mobility(np.array([-1.0, 0.05, 0.5, 100.0]), 0.1)
        assert np.allclose(out, [0.1, 0.1, 0.5, 10.0])

    def test_invalid_eps(self):
        with pytest.raises(ValueError):
            mobility(0.5, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(n=st.floats(-5, 50), eps=st.floats(0.01, 0.5))
    def test_continuity(self, n, eps):
        d = 1e-9
        assert abs(mobility(n + d, eps) - mobility(n, eps)) <= 2 * d


def _bump_state(n_cells=64, gamma=4.0, sigma=1.0, baseline=0.5, amplitude=0.3):
    grid = Grid.interval(1.0, n_cells)
    params = ModelParams(sigma=sigma, delta=1.0, gamma=gamma)
    n0 = cosine_field(grid, baseline, amplitude)
    return initial_state(n0, params), params


class TestChStep:
    def test_uniform_fixed_point(self):
        grid = Grid.interval(1.0, 32)
        params = ModelParams()
        state = initial_state(Field.constant(grid, 0.7), params)
        cfg = StepConfig(t_end=1.0)
        new = ch_step(state, params, cfg, dt=1e-4)
        assert np.array_equal(new.n.values, state.n.values)

    def test_mass_conservation_100_steps(self):
        state, params = _bump_state()
        cfg = StepConfig(t_end=1.0)
        dt = 0.5 * stable_dt(state, params, cfg)
        mass0 = quadrature(state.n)
        for _ in range(100):
            state = ch_step(state, params, cfg, dt=dt)
        assert abs(quadrature(state.n) - mass0) / mass0 <= 1e-12

    def test_step_halving_self_consistency(self):
        # first order in time: halving dt over a fixed window halves the
        # distance to the dt/2 reference (a single step probes the local
        # truncation error instead and contracts by 4)
        state, params = _bump_state(128)
        cfg = StepConfig(t_end=1.0)
        window = 64 * 1e-5

        def march(dt):
            s = state
            for _ in range(int(round(window / dt))):
                s = ch_step(s, params, cfg, dt=dt)
            return s.n.values

        ref = march(2.5e-6)
        g1 = np.max(np.abs(march(1e-5) - ref))
        g2 = np.max(np.abs(march(5e-6) - ref))
        # g1 ~ C (dt - dt_ref), g2 ~ C (dt/2 - dt_ref): ratio 3 for dt_ref = dt/4
        assert 2.4 <= g1 / g2 <= 3.6

        single = ch_step(state, params, cfg, dt=1e-5)
        two = ch_step(ch_step(state, params, cfg, dt=5e-6), params, cfg, dt=5e-6)
        assert np.max(np.abs(single.n.values - two.n.values)) <= 1.0 * 1e-5

    def test_positivity_at_zero_touching_state(self):
        # degenerate upwind keeps exact nonnegativity under the dt controller
        state, params = _bump_state(64, baseline=0.5, amplitude=0.5)
        cfg = StepConfig(t_end=1.0)
        assert state.n.values.min() >= 0.0
        for _ in range(50):
            state = ch_step(state, params, cfg)
            assert state.n.values.min() >= 0.0

    def test_growth_increases_mass(self):
        grid = Grid.interval(1.0, 64)
        params = ModelParams(growth=GrowthLaw.homeostatic(1.0, 2.0))
        state = initial_state(cosine_field(grid), params)
        cfg = StepConfig(t_end=1.0)
        mass0 = quadrature(state.n)
        new = ch_step(state, params, cfg)
        assert quadrature(new.n) > mass0

    def test_growth_respects_exponential_mass_bound(self):
        grid = Grid.interval(1.0, 64)
        params = ModelParams(growth=GrowthLaw.homeostatic(2.0, 1.5))
        cfg = StepConfig(t_end=0.01, dt_refresh_every=4)
        traj = simulate(cosine_field(grid), params, cfg, record_stride=20)
        assert all(r.mass_bound_ok for r in traj.records)
        cap = traj.mass0 * math.exp(params.growth.sup_abs() * traj.records[-1].t)
        assert traj.records[-1].mass <= cap * (1 + 1e-10)

    def test_dt_underflow(self):
        state, params = _bump_state(64)
        cfg = StepConfig(t_end=1.0, dt_min=1.0)
        with pytest.raises(DtUnderflow):
            ch_step(state, params, cfg)


class TestKsStep:
    def test_uniform_fixed_point(self):
        grid = Grid.interval(1.0, 32)
        params = ModelParams()
        state = initial_state(Field.constant(grid, 0.4), params)
        cfg = StepConfig(formulation="ks", t_end=1.0)
        new = ks_step(state, params, cfg, dt=1e-4)
        assert np.allclose(new.n.values, state.n.values, atol=1e-15)

    def test_mass_conservation_100_steps(self):
        state, params = _bump_state()
        cfg = StepConfig(formulation="ks", t_end=1.0)
        dt = 0.5 * stable_dt(state, params, cfg)
        mass0 = quadrature(state.n)
        for _ in range(100):
            state = ks_step(state, params, cfg, dt=dt)
        assert abs(quadrature(state.n) - mass0) / mass0 <= 1e-12

    def test_requires_relaxation(self):
        grid = Grid.interval(1.0, 32)
        params = ModelParams(sigma=0.0)
        state = initial_state(Field.constant(grid, 0.4), params)
        with pytest.raises(ValueError):
            ks_step(state, params, StepConfig(formulation="ks", t_end=1.0))

    def test_rejects_regularized_mobility(self):
        state, params = _bump_state()
        params = ModelParams(eps_mobility=0.1)
        cfg = StepConfig(formulation="ks", t_end=1.0, mobility_mode="regularized")
        with pytest.raises(ValueError):
            ks_step(state, params, cfg)

    def test_formulations_converge_under_refinement(self):
        # the two updates share a first-order semi-discretization error, so
        # their trajectory distance drops by about 2x per grid doubling
        params = ModelParams(sigma=1.0, delta=1.0, gamma=4.0)
        t_end = 0.02
        gaps = []
        for cells in (64, 128):
            grid = Grid.interval(1.0, cells)
            n0 = cosine_field(grid)
            state0 = initial_state(n0, params)
            dt = 0.8 * min(
                stable_dt(state0, params, StepConfig(formulation="ch", t_end=t_end)),
                stable_dt(state0, params, StepConfig(formulation="ks", t_end=t_end)))
            finals = {}
            for form in ("ch", "ks"):
                cfg = StepConfig(formulation=form, t_end=t_end,
                                 dt_policy="fixed", dt_init=dt)
                finals[form] = simulate(n0, params, cfg, record_stride=10**6)
            d = finals["ks"].final_state.n.values - finals["ch"].final_state.n.values
            gaps.append(math.sqrt(grid.cell_volume * float(np.sum(d * d))))
        assert gaps[0] / gaps[1] >= 1.8


class TestStableDt:
    def test_uniform_state_finite(self):
        state, params = _bump_state(64, amplitude=0.0)
        cfg = StepConfig(t_end=1.0)
        dt = stable_dt(state, params, cfg)
        assert math.isfinite(dt) and dt > 0

    def test_h_squared_scaling(self):
        dts = []
        for cells in (64, 128):
            state, params = _bump_state(cells, amplitude=0.0)
            dts.append(stable_dt(state, params, StepConfig(t_end=1.0)))
        assert 3.2 <= dts[0] / dts[1] <= 4.8

    def test_growth_cap(self):
        grid = Grid.interval(1.0, 32)
        growth = GrowthLaw.homeostatic(1000.0, 1.0)
        params = ModelParams(growth=growth)
        state = initial_state(Field.constant(grid, 0.5), params)
        dt = stable_dt(state, params, StepConfig(t_end=1.0))
        assert dt <= 1.0 / (2.0 * growth.sup_abs()) + 1e-15

    def test_below_bisection_oracle(self):
        # steep-gradient state: the controller must not exceed the largest
        # single step that keeps the density nonnegative
        grid = Grid.interval(1.0, 64)
        params = ModelParams(gamma=4.0)
        x = grid.centers(0)
        n0 = Field(grid, 0.5 + 0.5 * np.tanh((x - 0.5) / 0.05))
        state = initial_state(n0, params)
        cfg = StepConfig(t_end=1.0)
        dt_ctrl = stable_dt(state, params, cfg)

        def stays_nonnegative(dt):
            return ch_step(state, params, cfg, dt=dt).n.values.min() >= 0.0

        lo, hi = dt_ctrl, 64 * dt_ctrl
        assert stays_nonnegative(lo)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if stays_nonnegative(mid):
                lo = mid
            else:
                hi = mid
        assert dt_ctrl <= lo

    def test_sigma_zero_fourth_order_restriction(self):
        # the controller reproduces dt ~ h^4 / (8 delta B) in the stiff limit
        grid = Grid.interval(1.0, 128)
        params = ModelParams(sigma=0.0, delta=1.0, gamma=4.0)
        state = initial_state(Field.constant(grid, 1.0), params)
        cfg = StepConfig(t_end=1.0, cfl_safety=1.0)
        h = grid.spacings[0]
        expected = h**4 / (8.0 * params.delta)
        assert stable_dt(state, params, cfg) == pytest.approx(expected, rel=0.1)


class TestSimulate:
    def test_long_conservation(self):
        grid = Grid.interval(1.0, 128)
        params = ModelParams()
        cfg = StepConfig(t_end=0.016, dt_refresh_every=4)
        traj = simulate(cosine_field(grid), params, cfg, record_stride=200)
        drift = abs(traj.records[-1].mass - traj.mass0) / traj.mass0
        assert traj.total_steps >= 1000
        assert drift <= 1e-12

    def test_fixed_dt_determinism(self):
        grid = Grid.interval(1.0, 64)
        params = ModelParams()
        cfg = StepConfig(t_end=0.002, dt_policy="fixed", dt_init=2e-6)
        a = simulate(cosine_field(grid), params, cfg, record_stride=100)
        b = simulate(cosine_field(grid), params, cfg, record_stride=100)
        assert np.array_equal(a.final_state.n.values, b.final_state.n.values)
        assert a.record_times.tolist() == b.record_times.tolist()

    def test_snapshots_and_records(self):
        grid = Grid.interval(1.0, 64)
        params = ModelParams()
        cfg = StepConfig(t_end=0.001)
        traj = simulate(cosine_field(grid), params, cfg, record_stride=50,
                        snapshot_times=(0.0, 0.0005, 0.001), store_fields=True)
        assert len(traj.snapshots) == 3
        assert traj.snapshots[0].t == 0.0
        assert traj.snapshots[-1].t == pytest.approx(0.001, abs=1e-12)
        assert len(traj.record_fields) == len(traj.records)
        assert traj.records[-1].t == pytest.approx(0.001, abs=1e-12)

    def test_advance_dispatch(self):
        state, params = _bump_state(32)
        cfg = StepConfig(formulation="ks", t_end=1.0)
        a = advance(state, params, cfg, dt=1e-5)
        b = ks_step(state, params, cfg, dt=1e-5)
        assert np.array_equal(a.n.values, b.n.values)

    def test_2d_conservation_and_positivity(self):
        grid = Grid.rectangle((1.0, 1.0), (24, 24))
        params = ModelParams()
        cfg = StepConfig(t_end=0.002)
        traj = simulate(cosine_field(grid, 0.5, 0.5), params, cfg, record_stride=100)
        drift = abs(traj.records[-1].mass - traj.mass0) / max(traj.mass0, 1e-30)
        assert drift <= 1e-12
        assert traj.n_min_overall >= 0.0


class TestStepConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"formulation": "weird"},
        {"dt_init": 0.0},
        {"cfl_safety": 0.0},
        {"cfl_safety": 1.5},
        {"t_end": -1.0},
        {"mobility_mode": "none"},
        {"face_mobility": "harmonic"},
        {"dt_policy": "magic"},
        {"dt_refresh_every": 0},
    ])
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            StepConfig(**{"t_end": 1.0, **kwargs})

    def test_regularized_requires_eps(self):
        state, params = _bump_state(32)
        cfg = StepConfig(t_end=1.0, mobility_mode="regularized")
        with pytest.raises(ValueError):
            ch_step(state, params, cfg, dt=1e-6)
