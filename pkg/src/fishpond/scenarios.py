"""Input profiles, reference trajectories, closed-loop runs and metrics.

A scenario fixes the water-quality history of the pond (three ammonia
exposure cases over a controlled temperature/oxygen background), a desired
mean-weight trajectory, and a feeding controller. The runner closes the
loop one day at a time and reports the tracking error, food consumption
and mortality used in the study tables.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .controllers import ControllerState, PidGains, bangbang_feed, pid_feed
from .growth import (
    NO_STOCKING,
    EnvInput,
    ModelParams,
    PopulationState,
    ScenarioTrace,
    simulate,
    step_day,
)
from .mpc import Mpc1Config, Mpc2Config, mpc1_solve, mpc2_solve
from .qlearning import QConfig, QTable, greedy_feed

__all__ = [
    "Profile",
    "ReferenceTrajectory",
    "ControllerBundle",
    "ScenarioSetup",
    "ScenarioResult",
    "SensitivityRow",
    "CONTROLLERS",
    "build_case_profiles",
    "build_reference",
    "reference_from_csv",
    "staged_series",
    "rmse_percent",
    "food_consumption_g",
    "run_scenario",
    "sensitivity_study",
]

CONTROLLERS = ("bangbang", "pid", "mpc1", "mpc2", "qlearning")


@dataclass
class Profile:
    """Per-day water-quality series; ``feed`` only for open-loop studies."""

    temperature: np.ndarray
    oxygen: np.ndarray
    ammonia: np.ndarray
    feed: np.ndarray | None = None

    @property
    def period(self) -> int:
        return len(self.temperature)

    def env_at(self, t: int, feed: float) -> EnvInput:
        return EnvInput(
            f=feed,
            T=float(self.temperature[t]),
            DO=float(self.oxygen[t]),
            UIA=float(self.ammonia[t]),
        )


def build_case_profiles(
    case_id: int,
    period: int,
    params: ModelParams,
    *,
    temperature: float = 29.7,
    oxygen: float = 1.5,
    uia_base: float | None = None,
    uia_amplitude: float = 0.025,
    uia_cycle_days: float = 30.0,
    spike_day: float = 75.0,
    spike_peak: float = 0.62,
    spike_width: float = 1.5,
) -> Profile:
    """Ammonia exposure cases over a controlled T/DO background.

    Case 1 holds ammonia constant at half the critical limit; case 2 lets
    it oscillate below the limit; case 3 adds a single Gaussian spike that
    crosses the limit around ``spike_day``. The spike peak is sized so a
    fully fed stock of 10 loses exactly one fish on the worst day.
    Temperature is held at the operating set-point and oxygen above the
    feeding-response saturation bound.
    """
    if period < 1:
        raise ValueError("period must be at least 1")
    if case_id not in (1, 2, 3):
        raise ValueError(f"unknown case id {case_id!r}")
    if uia_base is None:
        uia_base = 0.5 * params.UIA_crit
    t = np.arange(period, dtype=float)
    if case_id == 1:
        ammonia = np.full(period, uia_base)
    else:
        ammonia = uia_base + uia_amplitude * np.sin(
            2.0 * math.pi * t / uia_cycle_days
        )
        if case_id == 3:
            ammonia = ammonia + (spike_peak - uia_base) * np.exp(
                -0.5 * ((t - spike_day) / spike_width) ** 2
            )
    return Profile(
        temperature=np.full(period, temperature),
        oxygen=np.full(period, oxygen),
        ammonia=np.clip(ammonia, 0.0, None),
    )


@dataclass
class ReferenceTrajectory:
    """Desired mean fish weight per day, including day zero."""

    weights: np.ndarray
    source: str = "model"

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0.0):
            raise ValueError("reference weights must be strictly positive")
        if np.any(np.diff(self.weights) < 0.0):
            raise ValueError("reference weights must be non-decreasing")

    @property
    def period(self) -> int:
        return len(self.weights) - 1

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["day", "desired_weight_g"])
            for day, w in enumerate(self.weights):
                writer.writerow([day, f"{w:.10g}"])


def staged_series(stages, period: int) -> np.ndarray:
    """Expand ``[(value, days), ...]`` into a per-day array of length ``period``.

    The final stage value is held if the stages fall short of the period.
    """
    out = np.empty(period)
    pos = 0
    value = None
    for value, days in stages:
        if days < 0:
            raise ValueError("stage lengths must be non-negative")
        end = min(period, pos + int(days))
        out[pos:end] = value
        pos = end
    if value is None:
        raise ValueError("at least one stage is required")
    out[pos:] = value
    return out


def build_reference(
    period: int,
    params: ModelParams,
    population: int = 1,
    feed=1.0,
    initial_weight: float = 6.24,
    substeps: int = 24,
) -> ReferenceTrajectory:
    """Generate a desired-weight trajectory from the growth model itself.

    The pond is simulated under an ideal environment (optimal temperature,
    saturating oxygen, no ammonia) and the given feed drive, and the mean
    weight is taken as the reference. ``population`` should match the stock
    being controlled: total biomass grows sublinearly, so the attainable
    mean-weight path depends on how many fish share the pond.
    """
    if period < 1:
        raise ValueError("period must be at least 1")
    feed_series = np.broadcast_to(np.asarray(feed, dtype=float), (period,))
    inputs = [
        EnvInput(
            f=float(feed_series[t]),
            T=params.T_opt,
            DO=params.do_ramp_upper + 0.5,
            UIA=0.0,
        )
        for t in range(period)
    ]
    initial = PopulationState(xi=population * initial_weight, p=population)
    trace = simulate(initial, inputs, NO_STOCKING, params, substeps=substeps)
    if trace.final_state.p != population:
        raise ValueError("reference generation must not lose fish")
    return ReferenceTrajectory(weights=trace.mean_weight(), source="model")


def reference_from_csv(path: str) -> ReferenceTrajectory:
    """Load a (day, desired_weight) CSV as written by ``to_csv``."""
    weights = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: expected a two-column reference CSV")
        for lineno, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected day,value")
            try:
                weights.append(float(row[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad weight {row[1]!r}") from exc
    if not weights:
        raise ValueError(f"{path}: reference CSV holds no rows")
    return ReferenceTrajectory(weights=np.asarray(weights), source="csv")


def rmse_percent(weights, reference) -> float:
    """Normalized tracking RMSE in percent over the culture period."""
    w = np.asarray(weights, dtype=float)
    wd = np.asarray(reference, dtype=float)
    if len(w) != len(wd):
        raise ValueError("weight and reference series must have equal length")
    if np.any(wd <= 0.0):
        raise ValueError("reference weights must be strictly positive")
    rel = (w - wd) / wd
    return 100.0 * math.sqrt(float(np.mean(rel * rel)))


def food_consumption_g(trace: ScenarioTrace) -> float:
    """Total food offered over the run: sum of feed * ration fraction * biomass."""
    return trace.food_consumption_g


@dataclass
class ControllerBundle:
    """Configured controllers available to the scenario runner."""

    pid: PidGains = field(default_factory=PidGains)
    mpc1: Mpc1Config = field(default_factory=Mpc1Config)
    mpc2: Mpc2Config = field(default_factory=Mpc2Config)
    qconfig: QConfig = field(default_factory=QConfig)
    qtable: QTable | None = None


@dataclass
class ScenarioSetup:
    """Everything the closed-loop runner needs besides case and stock size."""

    params: ModelParams = field(default_factory=ModelParams)
    controllers: ControllerBundle = field(default_factory=ControllerBundle)
    period: int = 150
    initial_weight: float = 6.24
    reference_feed: object = 1.0          # scalar or per-day series
    reference: ReferenceTrajectory | None = None   # explicit override
    profile_overrides: dict = field(default_factory=dict)
    plant_substeps: int = 24

    def resolve_reference(self, population: int) -> ReferenceTrajectory:
        if self.reference is not None:
            if self.reference.period != self.period:
                raise ValueError("reference length must match the period")
            return self.reference
        return build_reference(
            self.period,
            self.params,
            population=population,
            feed=self.reference_feed,
            initial_weight=self.initial_weight,
        )


@dataclass
class ScenarioResult:
    """Closed-loop run outcome with the study-table metrics."""

    controller: str
    case_id: int
    population: int
    trace: ScenarioTrace
    reference: np.ndarray
    rmse_percent: float
    food_g: float
    deaths: int
    final_population: int
    final_total_weight_g: float


def _slice_pad(values: np.ndarray, start: int, n: int) -> np.ndarray:
    """Horizon slice, holding the last value past the end of the series."""
    out = np.empty(n)
    m = len(values)
    for k in range(n):
        out[k] = values[min(start + k, m - 1)]
    return out


def run_scenario(
    controller: str,
    case_id: int,
    population: int,
    setup: ScenarioSetup,
) -> ScenarioResult:
    """Close the loop for one controller over one exposure case.

    Daily cycle: observe the mean weight, compute the day's feed (the joint
    predictive controller also sets the water-quality inputs), and step the
    pond. Deterministic for a fixed setup; the learning controller requires
    a trained table in the bundle.
    """
    if controller not in CONTROLLERS:
        raise ValueError(f"unknown controller {controller!r}")
    params = setup.params
    bundle = setup.controllers
    profile = build_case_profiles(
        case_id, setup.period, params, **setup.profile_overrides
    )
    reference = setup.resolve_reference(population)
    wd = reference.weights
    if controller == "qlearning" and bundle.qtable is None:
        raise ValueError("qlearning controller needs a trained table")

    # Default upper state bound for the predictive controllers: 20% above
    # the final reference weight.
    mpc1_cfg = bundle.mpc1
    if mpc1_cfg.w_max is None:
        mpc1_cfg = dataclasses.replace(mpc1_cfg, w_max=1.2 * float(wd[-1]))
    mpc2_cfg = bundle.mpc2
    if mpc2_cfg.w_max is None:
        mpc2_cfg = dataclasses.replace(mpc2_cfg, w_max=1.2 * float(wd[-1]))

    state = PopulationState(
        xi=population * setup.initial_weight, p=population, t=0
    )
    pid_state = ControllerState()
    prev_feed: float | None = None
    prev_input = None
    warm1 = warm2 = None
    applied: list[EnvInput] = []

    for t in range(setup.period):
        w = state.mean_weight
        if controller == "bangbang":
            env = profile.env_at(t, bangbang_feed(w, float(wd[t])))
        elif controller == "pid":
            feed, pid_state = pid_feed(w, float(wd[t]), pid_state, bundle.pid)
            env = profile.env_at(t, feed)
        elif controller == "qlearning":
            env = profile.env_at(
                t, greedy_feed(bundle.qtable, bundle.qconfig, w, float(wd[t]))
            )
        elif controller == "mpc1":
            n = mpc1_cfg.horizon
            ref_slice = _slice_pad(wd, t + 1, n)
            env_fixed = (
                _slice_pad(profile.temperature, t, n),
                _slice_pad(profile.oxygen, t, n),
                _slice_pad(profile.ammonia, t, n),
            )
            sol = mpc1_solve(
                state, ref_slice, env_fixed, mpc1_cfg, params,
                previous_feed=prev_feed, warm_start=warm1,
            )
            warm1 = np.append(sol.inputs[1:], sol.inputs[-1])
            env = profile.env_at(t, float(sol.inputs[0]))
        else:  # mpc2
            n = mpc2_cfg.horizon
            ref_slice = _slice_pad(wd, t + 1, n)
            sol = mpc2_solve(
                state, ref_slice, mpc2_cfg, params,
                previous_input=prev_input, warm_start=warm2,
            )
            warm2 = np.vstack([sol.inputs[1:], sol.inputs[-1]])
            f, T, DO, UIA = sol.inputs[0]
            env = EnvInput(f=float(f), T=float(T), DO=float(DO), UIA=float(UIA))
        applied.append(env)
        prev_feed = env.f
        prev_input = (env.f, env.T, env.DO, env.UIA)
        state = step_day(state, env, NO_STOCKING, params, setup.plant_substeps)

    initial = PopulationState(
        xi=population * setup.initial_weight, p=population, t=0
    )
    trace = simulate(
        initial, applied, NO_STOCKING, params, substeps=setup.plant_substeps
    )
    return ScenarioResult(
        controller=controller,
        case_id=case_id,
        population=population,
        trace=trace,
        reference=wd,
        rmse_percent=rmse_percent(trace.mean_weight(), wd),
        food_g=food_consumption_g(trace),
        deaths=population - trace.final_state.p,
        final_population=trace.final_state.p,
        final_total_weight_g=trace.final_state.xi,
    )


@dataclass
class SensitivityRow:
    case: str
    final_weight_g: float
    survivors: int
    trace: ScenarioTrace


def sensitivity_study(
    params: ModelParams,
    period: int = 150,
    population: int = 10,
    initial_weight: float = 6.24,
    cycle_days: float = 30.0,
    substeps: int = 24,
) -> list[SensitivityRow]:
    """Open-loop factor sweep: ideal baseline plus one oscillating input.

    Each perturbed case swings a single input widely enough to take its
    feeding-response factor across (roughly) its full [0, 1] range while
    the others stay ideal; full feed except in the feed case. Reports the
    final total weight and surviving fish for each run.
    """
    t = np.arange(period, dtype=float)
    wave = np.sin(2.0 * math.pi * t / cycle_days)
    ideal_T = params.T_opt
    ideal_DO = params.do_ramp_upper + 0.5
    cases = {
        "baseline": dict(),
        "feed": dict(f=0.5 * (1.0 + wave)),
        "temperature": dict(T=params.T_opt + (params.T_max - params.T_opt) * wave),
        "oxygen": dict(
            DO=0.5 * (params.do_ramp_lower + params.do_ramp_upper)
            + 0.5 * (params.do_ramp_upper - params.do_ramp_lower) * wave
        ),
        "ammonia": dict(UIA=0.5 * params.UIA_max * (1.0 + wave)),
    }
    rows = []
    for name, series in cases.items():
        f = series.get("f", np.ones(period))
        T = series.get("T", np.full(period, ideal_T))
        DO = series.get("DO", np.full(period, ideal_DO))
        UIA = series.get("UIA", np.zeros(period))
        inputs = [
            EnvInput(
                f=float(np.clip(f[k], 0.0, 1.0)),
                T=float(T[k]),
                DO=float(max(DO[k], 0.0)),
                UIA=float(max(UIA[k], 0.0)),
            )
            for k in range(period)
        ]
        initial = PopulationState(
            xi=population * initial_weight, p=population, t=0
        )
        trace = simulate(initial, inputs, NO_STOCKING, params, substeps=substeps)
        rows.append(
            SensitivityRow(
                case=name,
                final_weight_g=float(trace.xi[-1]),
                survivors=int(trace.population[-1]),
                trace=trace,
            )
        )
    return rows
