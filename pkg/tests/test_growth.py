"""Growth-model unit tests: factor functions, dynamics, day stepping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fishpond.growth import (
    NO_STOCKING,
    EnvInput,
    ModelParams,
    PopulationState,
    StockingPolicy,
    anabolism_coefficient,
    biomass_rhs,
    catabolism_coefficient,
    do_factor,
    mortality_coefficient,
    simulate,
    simulate_individual,
    step_day,
    temperature_factor,
    uia_factor,
)

PARAMS = ModelParams()

IDEAL = EnvInput(f=1.0, T=33.0, DO=1.5, UIA=0.0)


class TestParams:
    def test_defaults_valid(self):
        p = ModelParams()
        assert p.m == 0.67 and p.n == 0.81
        assert p.do_ramp_lower == 0.3 and p.do_ramp_upper == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(m=1.2),
            dict(n=0.0),
            dict(T_opt=50.0),
            dict(UIA_crit=2.0),
            dict(rho=2.5),
            dict(h=-1.0),
            dict(DO_crit=1.0, DO_min=1.0),
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_env_input_bounds(self):
        with pytest.raises(ValueError):
            EnvInput(f=1.5, T=30.0, DO=1.0, UIA=0.0)
        with pytest.raises(ValueError):
            EnvInput(f=0.5, T=30.0, DO=-1.0, UIA=0.0)

    def test_state_invariants(self):
        with pytest.raises(ValueError):
            PopulationState(xi=-1.0, p=5)
        with pytest.raises(ValueError):
            StockingPolicy(p_s=-1)
        assert PopulationState(xi=0.0, p=0).mean_weight == 0.0


class TestTemperatureFactor:
    def test_unity_at_optimum(self):
        assert temperature_factor(33.0, PARAMS) == 1.0

    def test_boundary_values(self):
        expected = math.exp(-4.6)
        assert temperature_factor(40.0, PARAMS) == pytest.approx(expected, abs=1e-12)
        assert temperature_factor(24.0, PARAMS) == pytest.approx(expected, abs=1e-12)

    @given(st.floats(min_value=-10.0, max_value=80.0))
    def test_bounded_unit_interval(self, T):
        # Underflows to exactly 0.0 far outside the viable band.
        assert 0.0 <= temperature_factor(T, PARAMS) <= 1.0

    @given(st.floats(min_value=20.0, max_value=44.0))
    def test_positive_on_viable_band(self, T):
        assert temperature_factor(T, PARAMS) > 0.0

    def test_peak_is_global(self):
        grid = np.linspace(10.0, 55.0, 901)
        vals = [temperature_factor(T, PARAMS) for T in grid]
        assert max(vals) <= 1.0
        assert temperature_factor(33.0, PARAMS) >= max(vals)

    def test_continuity_on_grid(self):
        grid = np.linspace(20.0, 45.0, 2501)
        vals = np.array([temperature_factor(T, PARAMS) for T in grid])
        assert np.max(np.abs(np.diff(vals))) < 0.01


class TestUiaFactor:
    def test_below_critical(self):
        assert uia_factor(0.05, PARAMS) == 1.0

    def test_at_maximum(self):
        assert uia_factor(1.4, PARAMS) == 0.0
        assert uia_factor(5.0, PARAMS) == 0.0

    def test_ramp_midpoint(self):
        assert uia_factor(0.73, PARAMS) == pytest.approx(0.5, abs=1e-12)

    def test_non_increasing_continuous(self):
        grid = np.linspace(0.0, 2.0, 4001)
        vals = np.array([uia_factor(u, PARAMS) for u in grid])
        assert np.all(np.diff(vals) <= 1e-12)
        assert np.max(np.abs(np.diff(vals))) < 0.005
        assert np.all((vals >= 0.0) & (vals <= 1.0))


class TestDoFactor:
    def test_saturated(self):
        assert do_factor(PARAMS.do_ramp_upper + 1.0, PARAMS) == 1.0

    def test_ramp_ends(self):
        assert do_factor(PARAMS.do_ramp_lower, PARAMS) == 0.0
        mid = 0.5 * (PARAMS.do_ramp_lower + PARAMS.do_ramp_upper)
        assert do_factor(mid, PARAMS) == pytest.approx(0.5, abs=1e-12)

    def test_non_decreasing_continuous(self):
        grid = np.linspace(0.0, 2.0, 4001)
        vals = np.array([do_factor(d, PARAMS) for d in grid])
        assert np.all(np.diff(vals) >= -1e-12)
        assert np.max(np.abs(np.diff(vals))) < 0.005
        assert np.all((vals >= 0.0) & (vals <= 1.0))


class TestMortality:
    def test_midpoint_is_half_asymptote(self):
        assert mortality_coefficient(0.80, PARAMS) == pytest.approx(
            0.497050, abs=1e-12
        )

    def test_clean_water(self):
        expected = 0.9941 / (1.0 + math.exp(10.36 * 0.80))
        assert mortality_coefficient(0.0, PARAMS) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.000249, abs=2e-6)

    def test_asymptote(self):
        assert mortality_coefficient(100.0, PARAMS) == pytest.approx(0.9941, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=10.0))
    def test_bounded(self, u):
        k = mortality_coefficient(u, PARAMS)
        assert 0.0 < k < PARAMS.mortality_max_pct / 100.0 + 1e-15

    def test_monotone(self):
        grid = np.linspace(0.0, 3.0, 1000)
        vals = [mortality_coefficient(u, PARAMS) for u in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestCoefficients:
    def test_anabolism_zero_without_feed(self):
        env = EnvInput(f=0.0, T=28.0, DO=0.7, UIA=0.2)
        assert anabolism_coefficient(env, PARAMS) == 0.0

    def test_anabolism_ideal(self):
        assert anabolism_coefficient(IDEAL, PARAMS) == pytest.approx(
            0.23312, abs=1e-12
        )

    def test_anabolism_linear_in_feed(self):
        half = EnvInput(f=0.5, T=33.0, DO=1.5, UIA=0.0)
        assert anabolism_coefficient(half, PARAMS) == pytest.approx(
            0.11656, abs=1e-12
        )

    def test_catabolism_at_t_min(self):
        assert catabolism_coefficient(24.0, PARAMS) == PARAMS.k_min

    def test_catabolism_values(self):
        assert catabolism_coefficient(33.0, PARAMS) == pytest.approx(
            0.00133 * math.exp(0.0132 * 9.0), rel=1e-12
        )
        assert catabolism_coefficient(40.0, PARAMS) == pytest.approx(
            0.00133 * math.exp(0.2112), rel=1e-12
        )
        assert catabolism_coefficient(40.0, PARAMS) == pytest.approx(1.6427e-3, rel=1e-3)

    def test_catabolism_increasing(self):
        temps = np.linspace(20.0, 45.0, 200)
        vals = [catabolism_coefficient(T, PARAMS) for T in temps]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestBiomassRhs:
    def test_empty_pond_fixed_point(self):
        state = PopulationState(xi=0.0, p=0)
        assert biomass_rhs(state, IDEAL, NO_STOCKING, PARAMS) == 0.0

    def test_reference_value(self):
        state = PopulationState(xi=62.4, p=10)
        got = biomass_rhs(state, IDEAL, NO_STOCKING, PARAMS)
        # Hand-evaluated term by term from the coefficient values above.
        anab = 0.23312 * 62.4 ** 0.67
        catab = catabolism_coefficient(33.0, PARAMS) * 62.4 ** 0.81
        mort = 10 * mortality_coefficient(0.0, PARAMS) * 6.24
        assert got == pytest.approx(anab - catab - mort, rel=1e-12)
        assert got == pytest.approx(3.66016, abs=1e-4)

    def test_fasting_smaller(self):
        state = PopulationState(xi=62.4, p=10)
        fasting = EnvInput(f=0.0, T=33.0, DO=1.5, UIA=0.0)
        assert biomass_rhs(state, fasting, NO_STOCKING, PARAMS) < biomass_rhs(
            state, IDEAL, NO_STOCKING, PARAMS
        )

    def test_rejects_negative_biomass(self):
        state = PopulationState.__new__(PopulationState)
        object.__setattr__(state, "xi", -1.0)
        object.__setattr__(state, "p", 1)
        object.__setattr__(state, "t", 0)
        with pytest.raises(ValueError):
            biomass_rhs(state, IDEAL, NO_STOCKING, PARAMS)

    def test_stocking_inflow(self):
        state = PopulationState(xi=0.0, p=0)
        stocking = StockingPolicy(p_s=3, xi_i=5.0)
        assert biomass_rhs(state, IDEAL, stocking, PARAMS) == pytest.approx(15.0)


class TestStepDay:
    def test_no_deaths_in_clean_water(self):
        state = PopulationState(xi=62.4, p=10)
        nxt = step_day(state, IDEAL, NO_STOCKING, PARAMS)
        assert nxt.p == 10
        assert nxt.t == 1
        assert nxt.xi > state.xi

    def test_lethal_spike_kills_eight(self):
        state = PopulationState(xi=62.4, p=10)
        env = EnvInput(f=1.0, T=33.0, DO=1.5, UIA=1.0)
        k1 = mortality_coefficient(1.0, PARAMS)
        assert int(10 * k1) == 8
        nxt = step_day(state, env, NO_STOCKING, PARAMS)
        assert nxt.p == 2

    def test_deaths_remove_mean_weight_share(self):
        state = PopulationState(xi=62.4, p=10)
        env = EnvInput(f=1.0, T=33.0, DO=1.5, UIA=1.0)
        nxt = step_day(state, env, NO_STOCKING, PARAMS)
        # Same day with the dose-response midpoint pushed out of reach, so
        # nothing dies but growth is identical: survivors keep exactly their
        # 2/10 share of the day-end biomass.
        no_deaths = ModelParams(mortality_midpoint=50.0)
        grown = step_day(state, env, NO_STOCKING, no_deaths)
        assert grown.p == 10
        assert nxt.xi == pytest.approx(0.2 * grown.xi, rel=1e-12)

    def test_empty_pond_absorbing(self):
        state = PopulationState(xi=0.0, p=0)
        nxt = step_day(state, IDEAL, NO_STOCKING, PARAMS)
        assert nxt.p == 0 and nxt.xi == 0.0

    def test_zero_population_normalizes_biomass(self):
        state = PopulationState(xi=10.0, p=0)
        nxt = step_day(state, IDEAL, NO_STOCKING, PARAMS)
        assert nxt.xi == 0.0

    def test_stocking_adds_fish(self):
        state = PopulationState(xi=62.4, p=10)
        nxt = step_day(state, IDEAL, StockingPolicy(p_s=2, xi_i=6.24), PARAMS)
        assert nxt.p == 12


class TestSimulate:
    def test_zero_day_horizon(self):
        state = PopulationState(xi=62.4, p=10)
        trace = simulate(state, [], NO_STOCKING, PARAMS)
        assert trace.n_days == 0
        assert trace.xi[0] == 62.4
        assert trace.final_state.p == 10

    def test_deterministic(self):
        state = PopulationState(xi=62.4, p=10)
        inputs = [IDEAL] * 30
        a = simulate(state, inputs, NO_STOCKING, PARAMS)
        b = simulate(state, inputs, NO_STOCKING, PARAMS)
        assert np.array_equal(a.xi, b.xi)
        assert np.array_equal(a.population, b.population)

    def test_population_non_increasing_without_stocking(self):
        rng = np.random.default_rng(7)
        state = PopulationState(xi=62.4, p=10)
        inputs = [
            EnvInput(
                f=float(rng.uniform(0.1, 1.0)),
                T=float(rng.uniform(24.0, 40.0)),
                DO=float(rng.uniform(0.3, 2.0)),
                UIA=float(rng.uniform(0.0, 1.2)),
            )
            for _ in range(120)
        ]
        trace = simulate(state, inputs, NO_STOCKING, PARAMS)
        assert np.all(np.diff(trace.population) <= 0)
        assert np.all(trace.population == trace.population.astype(int))

    def test_fasting_biomass_strictly_decreasing(self):
        state = PopulationState(xi=100.0, p=10)
        inputs = [EnvInput(f=0.0, T=30.0, DO=1.5, UIA=0.0)] * 60
        trace = simulate(state, inputs, NO_STOCKING, PARAMS)
        assert np.all(np.diff(trace.xi) < 0.0)

    def test_photoperiod_feed_product_invariance(self):
        # Only the product rho*f enters the anabolic gain.
        state = PopulationState(xi=62.4, p=10)
        lo = ModelParams(rho=0.5)
        hi = ModelParams(rho=1.0)
        full = [EnvInput(f=1.0, T=33.0, DO=1.5, UIA=0.0)] * 40
        half = [EnvInput(f=0.5, T=33.0, DO=1.5, UIA=0.0)] * 40
        a = simulate(state, full, NO_STOCKING, lo)
        b = simulate(state, half, NO_STOCKING, hi)
        assert np.allclose(a.xi, b.xi, rtol=1e-12)

    def test_cumulative_food_formula(self):
        state = PopulationState(xi=100.0, p=10)
        inputs = [IDEAL] * 3
        trace = simulate(state, inputs, NO_STOCKING, PARAMS)
        assert trace.cum_food[0] == pytest.approx(0.1 * 100.0)
        expected = 0.1 * (trace.xi[0] + trace.xi[1] + trace.xi[2])
        assert trace.cum_food[-1] == pytest.approx(expected, rel=1e-12)

    def test_trace_csv_round_shape(self, tmp_path):
        state = PopulationState(xi=62.4, p=10)
        trace = simulate(state, [IDEAL] * 5, NO_STOCKING, PARAMS)
        path = tmp_path / "trace.csv"
        trace.to_csv(str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == trace.CSV_COLUMNS
        assert len(lines) == 7  # header + 5 days + final state row


class TestNumerics:
    def test_population_one_matches_individual_model(self):
        inputs = [IDEAL] * 150
        pond = simulate(PopulationState(xi=6.24, p=1), inputs, NO_STOCKING, PARAMS)
        single = simulate_individual(6.24, inputs, PARAMS)
        rel = abs(pond.xi[-1] - single[-1]) / single[-1]
        assert rel < 1e-3

    def test_rk4_convergence_order(self):
        state = PopulationState(xi=62.4, p=10)
        inputs = [IDEAL] * 150
        endpoints = {}
        for sub in (6, 12, 24):
            endpoints[sub] = simulate(
                state, inputs, NO_STOCKING, PARAMS, substeps=sub
            ).xi[-1]
        d1 = abs(endpoints[6] - endpoints[12])
        d2 = abs(endpoints[12] - endpoints[24])
        order = math.log2(d1 / d2)
        assert order >= 3.5

    def test_individual_model_against_adaptive_oracle(self):
        scipy_integrate = pytest.importorskip("scipy.integrate")
        gain = 0.23312
        loss = catabolism_coefficient(33.0, PARAMS)

        def rhs(_t, w):
            return gain * w ** 0.67 - loss * w ** 0.81

        sol = scipy_integrate.solve_ivp(
            rhs, (0.0, 150.0), [6.24], rtol=1e-10, atol=1e-12, dense_output=True
        )
        ours = simulate_individual(6.24, [IDEAL] * 150, PARAMS)
        assert ours[-1] == pytest.approx(sol.y[0, -1], rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(
    f=st.floats(min_value=0.0, max_value=1.0),
    T=st.floats(min_value=20.0, max_value=44.0),
    DO=st.floats(min_value=0.0, max_value=3.0),
    UIA=st.floats(min_value=0.0, max_value=1.6),
)
def test_step_day_never_negative(f, T, DO, UIA):
    env = EnvInput(f=f, T=T, DO=DO, UIA=UIA)
    state = PopulationState(xi=50.0, p=8)
    nxt = step_day(state, env, NO_STOCKING, PARAMS)
    assert nxt.xi >= 0.0
    assert nxt.p >= 0
    assert math.isfinite(nxt.xi)
