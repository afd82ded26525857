"""Bioenergetic growth model for a fed fish pond.

The pond state is total biomass plus an integer head count. Biomass follows
an anabolism/catabolism power law in which food intake is scaled by
water-quality response factors for temperature, dissolved oxygen and
unionized ammonia (UIA). Acute ammonia exposure kills fish through a
logistic dose-response rate; deaths are realized once per simulated day as
whole fish.

Biomass is integrated within a day by classical fixed-step RK4 with the
inputs held constant (zero-order hold); the head count is updated at the
day boundary. All public types are immutable values and all operations are
pure functions, so they are safe to evaluate concurrently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ModelParams",
    "EnvInput",
    "PopulationState",
    "StockingPolicy",
    "NO_STOCKING",
    "ScenarioTrace",
    "temperature_factor",
    "uia_factor",
    "do_factor",
    "mortality_coefficient",
    "anabolism_coefficient",
    "catabolism_coefficient",
    "daily_rates",
    "biomass_rhs",
    "advance_day",
    "step_day",
    "simulate",
    "simulate_individual",
]


@dataclass(frozen=True)
class ModelParams:
    """Biological and environmental constants of the pond growth model.

    Weights are tracked in grams throughout.  The dissolved-oxygen ramp
    bounds are normalized at access time (`do_ramp_lower`/`do_ramp_upper`)
    so that the feeding response is non-decreasing in DO regardless of how
    the two raw bounds are ordered.
    """

    m: float = 0.67            # body-weight exponent, anabolism
    n: float = 0.81            # body-weight exponent, fasting catabolism
    b: float = 0.62            # food assimilation efficiency
    a: float = 0.53            # fraction of assimilated food lost
    h: float = 0.8             # food consumption coefficient, g^(1-m)/day
    rho: float = 1.0           # photoperiod factor, dimensionless in (0, 2)
    k_min: float = 0.00133     # fasting catabolism coefficient, g^(1-n)/day
    j: float = 0.0132          # catabolism temperature coefficient, 1/degC
    T_opt: float = 33.0        # degC
    T_min: float = 24.0        # degC
    T_max: float = 40.0        # degC
    UIA_crit: float = 0.06     # mg/L, feeding unaffected below this
    UIA_max: float = 1.4       # mg/L, feeding fully suppressed above this
    DO_crit: float = 0.3       # mg/L, raw ramp bound
    DO_min: float = 1.0        # mg/L, raw ramp bound
    kappa: float = 4.6         # temperature response shape constant
    mortality_max_pct: float = 99.41   # logistic asymptote, percent/day
    mortality_slope: float = 10.36     # logistic steepness, L/mg
    mortality_midpoint: float = 0.80   # mg/L UIA at half of the asymptote
    R_fraction: float = 0.10   # maximal daily ration as fraction of biomass

    def __post_init__(self) -> None:
        if not 0.0 < self.m < 1.0:
            raise ValueError(f"m must lie in (0, 1), got {self.m}")
        if not 0.0 < self.n < 1.0:
            raise ValueError(f"n must lie in (0, 1), got {self.n}")
        if not self.T_min < self.T_opt < self.T_max:
            raise ValueError(
                f"need T_min < T_opt < T_max, got {self.T_min}, {self.T_opt}, {self.T_max}"
            )
        if not 0.0 < self.UIA_crit < self.UIA_max:
            raise ValueError(
                f"need 0 < UIA_crit < UIA_max, got {self.UIA_crit}, {self.UIA_max}"
            )
        if not 0.0 < self.rho < 2.0:
            raise ValueError(f"rho must lie in (0, 2), got {self.rho}")
        if self.DO_crit == self.DO_min:
            raise ValueError("DO ramp bounds must differ")
        for name in ("b", "a", "h", "k_min", "j", "kappa", "mortality_max_pct",
                     "mortality_slope", "mortality_midpoint", "R_fraction",
                     "DO_crit", "DO_min"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def do_ramp_lower(self) -> float:
        return min(self.DO_crit, self.DO_min)

    @property
    def do_ramp_upper(self) -> float:
        return max(self.DO_crit, self.DO_min)


@dataclass(frozen=True)
class EnvInput:
    """Control/input vector applied over one day: feed plus water quality."""

    f: float      # relative feeding rate in [0, 1] (1 = maximal daily ration)
    T: float      # temperature, degC
    DO: float     # dissolved oxygen, mg/L
    UIA: float    # unionized ammonia, mg/L

    def __post_init__(self) -> None:
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f"relative feed must lie in [0, 1], got {self.f}")
        if self.T < 0.0 or self.DO < 0.0 or self.UIA < 0.0:
            raise ValueError("temperature, DO and UIA must be non-negative")


@dataclass(frozen=True)
class PopulationState:
    """Pond state: total biomass (g), head count, and the simulation day."""

    xi: float
    p: int
    t: int = 0

    def __post_init__(self) -> None:
        if self.xi < 0.0:
            raise ValueError(f"biomass must be non-negative, got {self.xi}")
        if self.p < 0:
            raise ValueError(f"population must be non-negative, got {self.p}")

    @property
    def mean_weight(self) -> float:
        """Mean fish weight xi/p in grams; 0 for an empty pond."""
        return self.xi / self.p if self.p > 0 else 0.0


@dataclass(frozen=True)
class StockingPolicy:
    """Daily restocking: fish added per day and their individual weight."""

    p_s: int = 0          # fish added per day
    xi_i: float = 6.24    # weight of each stocked fish, g

    def __post_init__(self) -> None:
        if self.p_s < 0:
            raise ValueError("stocking rate must be non-negative")
        if self.xi_i <= 0.0:
            raise ValueError("stocked fish weight must be positive")


NO_STOCKING = StockingPolicy(p_s=0)


def temperature_factor(T: float, params: ModelParams) -> float:
    """Feeding response to temperature, in (0, 1], peaking at ``T_opt``.

    Quartic-exponential decay on either side of the optimum, with the two
    sides scaled by the distance to ``T_max`` and ``T_min`` respectively.
    Defined for any real temperature; far outside the viable band it simply
    decays toward zero.
    """
    if T > params.T_opt:
        z = (T - params.T_opt) / (params.T_max - params.T_opt)
    else:
        z = (params.T_opt - T) / (params.T_opt - params.T_min)
    return math.exp(-params.kappa * z ** 4)


def uia_factor(UIA: float, params: ModelParams) -> float:
    """Feeding response to unionized ammonia: 1 below the critical limit,
    linear ramp down to 0 at ``UIA_max``, 0 beyond. Non-increasing."""
    if UIA < params.UIA_crit:
        return 1.0
    if UIA >= params.UIA_max:
        return 0.0
    return (params.UIA_max - UIA) / (params.UIA_max - params.UIA_crit)


def do_factor(DO: float, params: ModelParams) -> float:
    """Feeding response to dissolved oxygen: 0 below the lower ramp bound,
    linear ramp up to 1 at the upper bound, 1 beyond. Non-decreasing."""
    lower, upper = params.do_ramp_lower, params.do_ramp_upper
    if DO >= upper:
        return 1.0
    if DO <= lower:
        return 0.0
    return (DO - lower) / (upper - lower)


def mortality_coefficient(UIA: float, params: ModelParams) -> float:
    """Daily mortality fraction from ammonia exposure.

    Logistic dose-response fitted in percent per day, converted here to a
    fraction in [0, ``mortality_max_pct``/100). Monotone increasing in UIA.
    """
    z = -params.mortality_slope * (UIA - params.mortality_midpoint)
    return (params.mortality_max_pct / 100.0) / (1.0 + math.exp(z))


def anabolism_coefficient(env: EnvInput, params: ModelParams) -> float:
    """Anabolic growth coefficient h*rho*f*b*(1-a)*tau(T)*sigma(DO).

    The full anabolic gain applied to biomass is this value times the
    ammonia feeding factor ``uia_factor(env.UIA)``.
    """
    return (
        params.h
        * params.rho
        * env.f
        * params.b
        * (1.0 - params.a)
        * temperature_factor(env.T, params)
        * do_factor(env.DO, params)
    )


def catabolism_coefficient(T: float, params: ModelParams) -> float:
    """Fasting catabolism coefficient k_min*exp(j*(T - T_min)); increasing in T."""
    return params.k_min * math.exp(params.j * (T - params.T_min))


def daily_rates(
    T: float, DO: float, UIA: float, params: ModelParams
) -> tuple[float, float, float]:
    """Precompute the day's water-quality rates for a unit feed.

    Returns ``(gain_per_feed, loss, k1)`` where the anabolic biomass gain is
    ``gain_per_feed * f``, ``loss`` is the catabolic coefficient and ``k1``
    the daily mortality fraction. Shared by the day stepper, the predictive
    controllers and the learning environment so they all see one model.
    """
    gain_per_feed = (
        params.h
        * params.rho
        * params.b
        * (1.0 - params.a)
        * temperature_factor(T, params)
        * do_factor(DO, params)
        * uia_factor(UIA, params)
    )
    loss = catabolism_coefficient(T, params)
    k1 = mortality_coefficient(UIA, params)
    return gain_per_feed, loss, k1


def biomass_rhs(
    state: PopulationState,
    env: EnvInput,
    stocking: StockingPolicy,
    params: ModelParams,
) -> float:
    """Instantaneous biomass derivative in g/day.

    Sum of restocking inflow, anabolism, catabolism, and the continuous
    mortality drain ``p * k1 * xi_a``. With no fish the anabolism and
    mortality terms are zero.
    """
    if state.xi < 0.0:
        raise ValueError("biomass must be non-negative")
    stock_term = stocking.p_s * stocking.xi_i
    loss_term = catabolism_coefficient(env.T, params) * state.xi ** params.n
    if state.p > 0:
        gain_term = (
            anabolism_coefficient(env, params)
            * uia_factor(env.UIA, params)
            * state.xi ** params.m
        )
        mortality_term = (
            state.p
            * mortality_coefficient(env.UIA, params)
            * (state.xi / state.p)
        )
    else:
        gain_term = 0.0
        mortality_term = 0.0
    return stock_term + gain_term - loss_term - mortality_term


def _integrate_biomass(
    xi: float,
    gain: float,
    loss: float,
    stock: float,
    m: float,
    n: float,
    substeps: int,
) -> float:
    """Fixed-step RK4 over one day on d(xi)/dt = stock + gain*xi^m - loss*xi^n."""
    dt = 1.0 / substeps

    def rhs(x: float) -> float:
        x = max(x, 0.0)  # guard stage undershoot near an emptying pond
        return stock + gain * x ** m - loss * x ** n

    for _ in range(substeps):
        k1 = rhs(xi)
        k2 = rhs(xi + 0.5 * dt * k1)
        k3 = rhs(xi + 0.5 * dt * k2)
        k4 = rhs(xi + dt * k3)
        xi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return max(xi, 0.0)


def advance_day(
    xi: float,
    p: int,
    feed: float,
    gain_per_feed: float,
    loss: float,
    k1: float,
    stocking: StockingPolicy,
    params: ModelParams,
    substeps: int,
) -> tuple[float, int, int]:
    """Advance the pond one day from precomputed rates; returns (xi, p, deaths).

    Biomass is integrated without the continuous mortality drain; mortality
    is realized once at the day boundary instead, removing ``deaths`` whole
    fish and their share of biomass, which keeps the biomass and head-count
    losses consistent and avoids counting the same deaths twice. The death
    count truncates ``p * k1 * feed`` toward zero: feeding activity scales
    how much of the dissolved toxicant the fish actually ingest, so a pond
    fed sparingly through an ammonia episode loses fewer fish.
    """
    if p == 0:
        xi = 0.0
    xi_new = _integrate_biomass(
        xi, gain_per_feed * feed, loss, stocking.p_s * stocking.xi_i,
        params.m, params.n, substeps,
    )
    deaths = 0
    if p > 0:
        deaths = min(p, int(p * k1 * feed))
        if deaths:
            xi_new = max(0.0, xi_new - deaths * (xi_new / p))
    p_new = max(0, p + stocking.p_s - deaths)
    if p_new == 0:
        xi_new = 0.0
    return xi_new, p_new, deaths


def step_day(
    state: PopulationState,
    env: EnvInput,
    stocking: StockingPolicy,
    params: ModelParams,
    substeps: int = 24,
) -> PopulationState:
    """Advance the pond state one day under the given inputs.

    RK4 integration of the biomass dynamics with the inputs held constant,
    followed by the discrete population update (restocking minus realized
    deaths, clamped at zero). A state with fish count zero is normalized to
    zero biomass.
    """
    gain_per_feed, loss, k1 = daily_rates(env.T, env.DO, env.UIA, params)
    xi, p, _ = advance_day(
        state.xi, state.p, env.f, gain_per_feed, loss, k1,
        stocking, params, substeps,
    )
    return PopulationState(xi=xi, p=p, t=state.t + 1)


@dataclass
class ScenarioTrace:
    """Per-day record of a simulation run.

    State arrays (``xi``, ``population``) have one more entry than the input
    arrays: index ``t`` is the state at the start of day ``t``, and the last
    entry is the final state. ``cum_food`` accumulates the ration actually
    offered each day, ``feed * R_fraction * biomass``, in grams.
    """

    xi: np.ndarray            # (n+1,) total biomass, g
    population: np.ndarray    # (n+1,) head count
    feed: np.ndarray          # (n,) applied relative feed
    temperature: np.ndarray   # (n,)
    oxygen: np.ndarray        # (n,)
    ammonia: np.ndarray       # (n,)
    tau: np.ndarray           # (n,) temperature feeding factor
    sigma: np.ndarray         # (n,) DO feeding factor
    v: np.ndarray             # (n,) UIA feeding factor
    k1: np.ndarray            # (n,) daily mortality fraction
    deaths: np.ndarray        # (n,) fish lost during the day
    cum_food: np.ndarray      # (n,) cumulative food offered, g

    CSV_COLUMNS = (
        "day,xi_g,p,mean_w_g,f,T,DO,UIA,tau,sigma,v,k1,deaths,cum_food_g"
    )

    @property
    def n_days(self) -> int:
        return len(self.feed)

    def mean_weight(self) -> np.ndarray:
        """Per-day mean fish weight, 0 where the pond is empty."""
        out = np.zeros_like(self.xi)
        alive = self.population > 0
        out[alive] = self.xi[alive] / self.population[alive]
        return out

    @property
    def final_state(self) -> PopulationState:
        return PopulationState(
            xi=float(self.xi[-1]), p=int(self.population[-1]), t=self.n_days
        )

    @property
    def total_deaths(self) -> int:
        return int(self.deaths.sum())

    @property
    def food_consumption_g(self) -> float:
        return float(self.cum_food[-1]) if self.n_days else 0.0

    def to_csv(self, path: str) -> None:
        """Write the trace; the final row carries the end state only."""
        mean_w = self.mean_weight()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_COLUMNS.split(","))
            for t in range(self.n_days):
                writer.writerow([
                    t,
                    f"{self.xi[t]:.10g}",
                    int(self.population[t]),
                    f"{mean_w[t]:.10g}",
                    f"{self.feed[t]:.10g}",
                    f"{self.temperature[t]:.10g}",
                    f"{self.oxygen[t]:.10g}",
                    f"{self.ammonia[t]:.10g}",
                    f"{self.tau[t]:.10g}",
                    f"{self.sigma[t]:.10g}",
                    f"{self.v[t]:.10g}",
                    f"{self.k1[t]:.10g}",
                    int(self.deaths[t]),
                    f"{self.cum_food[t]:.10g}",
                ])
            t = self.n_days
            writer.writerow([
                t, f"{self.xi[t]:.10g}", int(self.population[t]),
                f"{mean_w[t]:.10g}", "", "", "", "", "", "", "", "", "", "",
            ])


def simulate(
    initial: PopulationState,
    inputs: Sequence[EnvInput],
    stocking: StockingPolicy,
    params: ModelParams,
    substeps: int = 24,
) -> ScenarioTrace:
    """Run the pond model over a sequence of daily inputs.

    Deterministic: identical inputs produce identical traces. An empty input
    sequence yields a trace holding only the initial state.
    """
    n = len(inputs)
    xi = np.empty(n + 1)
    population = np.empty(n + 1, dtype=int)
    feed = np.empty(n)
    temperature = np.empty(n)
    oxygen = np.empty(n)
    ammonia = np.empty(n)
    tau = np.empty(n)
    sigma = np.empty(n)
    v = np.empty(n)
    k1 = np.empty(n)
    deaths = np.empty(n, dtype=int)
    cum_food = np.empty(n)

    state = initial
    if state.p == 0 and state.xi > 0.0:
        state = PopulationState(xi=0.0, p=0, t=state.t)
    xi[0] = state.xi
    population[0] = state.p
    food_total = 0.0
    cur_xi, cur_p = state.xi, state.p
    for t, env in enumerate(inputs):
        feed[t] = env.f
        temperature[t] = env.T
        oxygen[t] = env.DO
        ammonia[t] = env.UIA
        tau[t] = temperature_factor(env.T, params)
        sigma[t] = do_factor(env.DO, params)
        v[t] = uia_factor(env.UIA, params)
        gain_per_feed, loss, k1_t = daily_rates(env.T, env.DO, env.UIA, params)
        k1[t] = k1_t
        food_total += env.f * params.R_fraction * cur_xi
        cum_food[t] = food_total
        cur_xi, cur_p, died = advance_day(
            cur_xi, cur_p, env.f, gain_per_feed, loss, k1_t,
            stocking, params, substeps,
        )
        deaths[t] = died
        xi[t + 1] = cur_xi
        population[t + 1] = cur_p

    return ScenarioTrace(
        xi=xi, population=population, feed=feed, temperature=temperature,
        oxygen=oxygen, ammonia=ammonia, tau=tau, sigma=sigma, v=v, k1=k1,
        deaths=deaths, cum_food=cum_food,
    )


def simulate_individual(
    w0: float,
    inputs: Sequence[EnvInput],
    params: ModelParams,
    substeps: int = 24,
) -> np.ndarray:
    """Integrate the single-fish growth law dw/dt = gain*w^m - loss*w^n.

    Same anabolism/catabolism structure as the pond model but with no
    restocking and no mortality; used to cross-check the pond model at a
    head count of one. Returns the daily weights, length ``len(inputs)+1``.
    """
    if w0 <= 0.0:
        raise ValueError("initial weight must be positive")
    weights = np.empty(len(inputs) + 1)
    weights[0] = w0
    w = w0
    for t, env in enumerate(inputs):
        gain_per_feed, loss, _ = daily_rates(env.T, env.DO, env.UIA, params)
        w = _integrate_biomass(
            w, gain_per_feed * env.f, loss, 0.0, params.m, params.n, substeps
        )
        weights[t + 1] = w
    return weights
