"""Receding-horizon feeding controllers built on direct single shooting.

Two variants: the feed-only controller optimizes the relative feeding rate
over the horizon against fixed water-quality profiles; the joint controller
additionally chooses temperature, dissolved oxygen and ammonia set-points,
penalizing their distance from desired references.

Candidate input sequences are scored by simulating the pond model forward
(one rectangle-rule term per day) and minimized with projected cyclic
coordinate descent: a coarse scan plus golden-section refinement per
coordinate, multistarted from a fixed set of baseline candidates so the
returned objective can never exceed the all-minimum, all-maximum or
hold-previous policies. Everything is deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .growth import (
    NO_STOCKING,
    ModelParams,
    PopulationState,
    StockingPolicy,
    advance_day,
    daily_rates,
)

__all__ = [
    "Mpc1Config",
    "Mpc2Config",
    "HorizonSolution",
    "mpc1_objective",
    "mpc1_solve",
    "mpc2_objective",
    "mpc2_solve",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 5
_LINE_TOL_FRAC = 1e-3


@dataclass(frozen=True)
class Mpc1Config:
    """Feed-only horizon problem: tracking error plus a feed penalty."""

    horizon: int = 6
    feed_weight: float = 0.002
    f_min: float = 0.1
    f_max: float = 1.0
    w_min: float = 0.0            # lower state bound, g (0 disables)
    w_max: float | None = None    # upper state bound, g
    move_limit: float | None = None   # max |feed change| per day; None = off
    bound_penalty: float = 1e6
    substeps: int = 4             # prediction-model RK4 substeps per day
    max_sweeps: int = 200
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.feed_weight < 0.0:
            raise ValueError("feed weight must be non-negative")
        if self.f_min > self.f_max:
            raise ValueError("feed bounds must satisfy f_min <= f_max")


@dataclass(frozen=True)
class Mpc2Config:
    """Joint feed and water-quality horizon problem."""

    horizon: int = 5
    feed_weight: float = 0.001
    temperature_weight: float = 0.2
    oxygen_weight: float = 0.5
    ammonia_weight: float = 0.5
    temperature_ref: float = 33.0
    oxygen_ref: float = 1.5
    ammonia_ref: float = 0.03
    feed_bounds: tuple[float, float] = (0.1, 1.0)
    temperature_bounds: tuple[float, float] = (24.0, 40.0)
    oxygen_bounds: tuple[float, float] = (0.3, 3.0)
    ammonia_bounds: tuple[float, float] = (0.005, 1.4)
    w_min: float = 0.0
    w_max: float | None = None
    bound_penalty: float = 1e6
    substeps: int = 4
    max_sweeps: int = 200
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.ammonia_ref <= 0.0:
            raise ValueError("ammonia reference must be positive (normalized term)")
        for w in (self.feed_weight, self.temperature_weight,
                  self.oxygen_weight, self.ammonia_weight):
            if w < 0.0:
                raise ValueError("penalty weights must be non-negative")
        for lo, hi in (self.feed_bounds, self.temperature_bounds,
                       self.oxygen_bounds, self.ammonia_bounds):
            if lo > hi:
                raise ValueError("each bound pair must satisfy lo <= hi")

    @property
    def input_bounds(self) -> tuple[tuple[float, float], ...]:
        """Per-day bounds in input order (feed, T, DO, UIA)."""
        return (self.feed_bounds, self.temperature_bounds,
                self.oxygen_bounds, self.ammonia_bounds)

    @property
    def input_refs(self) -> tuple[float, float, float]:
        return (self.temperature_ref, self.oxygen_ref, self.ammonia_ref)


@dataclass
class HorizonSolution:
    """Optimized input sequence with solver diagnostics."""

    inputs: np.ndarray
    objective: float
    sweeps: int
    converged: bool


def _check_reference(reference, horizon: int) -> np.ndarray:
    wd = np.asarray(reference, dtype=float)
    if len(wd) < horizon:
        raise ValueError(f"reference must cover the horizon ({horizon} days)")
    if np.any(wd[:horizon] <= 0.0):
        raise ValueError("reference weights must be strictly positive")
    return wd


def _state_bound_penalty(w: float, w_min: float, w_max: float | None,
                         weight: float) -> float:
    pen = 0.0
    if w < w_min:
        pen += weight * (w_min - w) ** 2
    if w_max is not None and w > w_max:
        pen += weight * (w - w_max) ** 2
    return pen


def _make_mpc1_objective(
    current: PopulationState,
    reference: np.ndarray,
    rates: list[tuple[float, float, float]],
    config: Mpc1Config,
    params: ModelParams,
    stocking: StockingPolicy,
    previous_feed: float | None,
):
    horizon = config.horizon

    def objective(feeds) -> float:
        xi, p = current.xi, current.p
        total = 0.0
        last = previous_feed
        for d in range(horizon):
            f = feeds[d]
            gain, loss, k1 = rates[d]
            xi, p, _ = advance_day(
                xi, p, f, gain, loss, k1, stocking, params, config.substeps
            )
            w = xi / p if p > 0 else 0.0
            err = (w - reference[d]) / reference[d]
            total += err * err + config.feed_weight * f * f
            total += _state_bound_penalty(
                w, config.w_min, config.w_max, config.bound_penalty
            )
            if config.move_limit is not None and last is not None:
                over = abs(f - last) - config.move_limit
                if over > 0.0:
                    total += config.bound_penalty * over * over
            last = f
        return total

    return objective


def mpc1_objective(
    feed_sequence,
    current: PopulationState,
    reference,
    env_fixed,
    config: Mpc1Config,
    params: ModelParams,
    stocking: StockingPolicy = NO_STOCKING,
    previous_feed: float | None = None,
) -> float:
    """Score a candidate feed sequence by forward simulation.

    ``env_fixed`` is a ``(temperature, oxygen, ammonia)`` triple of per-day
    profiles covering the horizon. The score is the daily sum of squared
    normalized tracking error plus the weighted squared feed, with state
    bounds enforced through a quadratic penalty.
    """
    feeds = np.asarray(feed_sequence, dtype=float)
    if len(feeds) != config.horizon:
        raise ValueError("feed sequence length must equal the horizon")
    wd = _check_reference(reference, config.horizon)
    T, DO, UIA = env_fixed
    if min(len(T), len(DO), len(UIA)) < config.horizon:
        raise ValueError("environment profiles must cover the horizon")
    rates = [
        daily_rates(T[d], DO[d], UIA[d], params) for d in range(config.horizon)
    ]
    fn = _make_mpc1_objective(
        current, wd, rates, config, params, stocking, previous_feed
    )
    return fn(feeds)


def _golden_section(fn, lo: float, hi: float, tol: float):
    """Golden-section line minimum of ``fn`` on [lo, hi]; returns (x, fx)."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _line_minimize(fn, lo: float, hi: float, scan_points: int):
    """Coarse scan then golden-section refinement inside the best bracket."""
    xs = np.linspace(lo, hi, scan_points)
    vals = [fn(x) for x in xs]
    i = int(np.argmin(vals))
    best_x, best_f = float(xs[i]), vals[i]
    blo = xs[max(i - 1, 0)]
    bhi = xs[min(i + 1, scan_points - 1)]
    tol = max(1e-9, _LINE_TOL_FRAC * (hi - lo))
    if bhi - blo > tol:
        gx, gf = _golden_section(fn, float(blo), float(bhi), tol)
        if gf < best_f:
            best_x, best_f = gx, gf
    return best_x, best_f


def _coordinate_descent(fn, x0: np.ndarray, bounds, max_sweeps: int,
                        tol: float, scan_points: int):
    """Projected cyclic coordinate descent from one start point."""
    x = np.array(x0, dtype=float)
    fx = fn(x)
    sweeps = 0
    converged = False
    for _ in range(max_sweeps):
        before = fx
        for i, (lo, hi) in enumerate(bounds):
            if hi - lo <= 0.0:
                continue

            def line(v, i=i):
                old = x[i]
                x[i] = v
                val = fn(x)
                x[i] = old
                return val

            best_x, best_f = _line_minimize(line, lo, hi, scan_points)
            if best_f < fx:
                x[i] = best_x
                fx = best_f
        sweeps += 1
        if before - fx < tol:
            converged = True
            break
    return x, fx, sweeps, converged


def _seed_candidates(bounds, baselines) -> list[np.ndarray]:
    """Baseline starts plus cheap global seeding in low dimension.

    In one dimension the seed grid is dense enough to bracket any minimum;
    up to four dimensions a three-level factorial is added. Candidates are
    clipped into the box so returned solutions always satisfy the bounds.
    """
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    cands = [np.clip(np.asarray(b, dtype=float), lo, hi) for b in baselines]
    dim = len(bounds)
    if dim == 1:
        cands += [np.array([v]) for v in np.linspace(lo[0], hi[0], 19)]
    elif dim <= 4:
        levels = [np.linspace(b[0], b[1], 3) for b in bounds]
        cands += [np.array(c) for c in itertools.product(*levels)]
    return cands


def _solve_box(fn, bounds, baselines, max_sweeps: int, tol: float,
               scan_points: int = _SCAN_POINTS, n_starts: int = 2):
    scored = sorted(
        ((fn(c), k, c) for k, c in enumerate(_seed_candidates(bounds, baselines))),
        key=lambda t: (t[0], t[1]),
    )
    best_x = scored[0][2]
    best_f = scored[0][0]
    total_sweeps = 0
    converged = False
    for f0, _, x0 in scored[:n_starts]:
        x, fx, sweeps, conv = _coordinate_descent(
            fn, x0, bounds, max_sweeps, tol, scan_points
        )
        total_sweeps += sweeps
        if fx < best_f:
            best_x, best_f = x, fx
            converged = conv
        elif conv and np.array_equal(x0, best_x):
            converged = True
    if best_f == scored[0][0]:
        # No descent improved on the best seed; treat the seed as converged.
        converged = True
    return np.asarray(best_x, dtype=float), best_f, total_sweeps, converged


def mpc1_solve(
    current: PopulationState,
    reference,
    env_fixed,
    config: Mpc1Config,
    params: ModelParams,
    stocking: StockingPolicy = NO_STOCKING,
    previous_feed: float | None = None,
    warm_start=None,
) -> HorizonSolution:
    """Optimize the feed sequence over the horizon; apply its first element.

    Multistarts from the all-minimum, all-maximum and hold-previous feed
    candidates, plus an optional warm start (typically the previous horizon
    solution shifted by one day). Bounds hold exactly by projection.
    """
    wd = _check_reference(reference, config.horizon)
    T, DO, UIA = env_fixed
    rates = [
        daily_rates(T[d], DO[d], UIA[d], params) for d in range(config.horizon)
    ]
    fn = _make_mpc1_objective(
        current, wd, rates, config, params, stocking, previous_feed
    )
    n = config.horizon
    baselines = [
        np.full(n, config.f_min),
        np.full(n, config.f_max),
    ]
    if previous_feed is not None:
        baselines.append(np.full(n, previous_feed))
    if warm_start is not None:
        baselines.append(np.asarray(warm_start, dtype=float))
    bounds = [(config.f_min, config.f_max)] * n
    x, fx, sweeps, converged = _solve_box(
        fn, bounds, baselines, config.max_sweeps, config.tol
    )
    return HorizonSolution(inputs=x, objective=fx, sweeps=sweeps,
                           converged=converged)


def _make_mpc2_objective(
    current: PopulationState,
    reference: np.ndarray,
    config: Mpc2Config,
    params: ModelParams,
    stocking: StockingPolicy,
):
    horizon = config.horizon
    t_ref, do_ref, uia_ref = config.input_refs

    def objective(u_flat) -> float:
        xi, p = current.xi, current.p
        total = 0.0
        for d in range(horizon):
            f = u_flat[4 * d]
            T = u_flat[4 * d + 1]
            DO = u_flat[4 * d + 2]
            UIA = u_flat[4 * d + 3]
            gain, loss, k1 = daily_rates(T, DO, UIA, params)
            xi, p, _ = advance_day(
                xi, p, f, gain, loss, k1, stocking, params, config.substeps
            )
            w = xi / p if p > 0 else 0.0
            err = (w - reference[d]) / reference[d]
            uia_err = (UIA - uia_ref) / uia_ref
            total += (
                err * err
                + config.feed_weight * f * f
                + config.temperature_weight * (T - t_ref) ** 2
                + config.oxygen_weight * (DO - do_ref) ** 2
                + config.ammonia_weight * uia_err * uia_err
            )
            total += _state_bound_penalty(
                w, config.w_min, config.w_max, config.bound_penalty
            )
        return total

    return objective


def mpc2_objective(
    input_sequence,
    current: PopulationState,
    reference,
    config: Mpc2Config,
    params: ModelParams,
    stocking: StockingPolicy = NO_STOCKING,
) -> float:
    """Score a joint input sequence of shape (horizon, 4): (f, T, DO, UIA)."""
    u = np.asarray(input_sequence, dtype=float)
    if u.shape != (config.horizon, 4):
        raise ValueError(f"input sequence must have shape ({config.horizon}, 4)")
    wd = _check_reference(reference, config.horizon)
    fn = _make_mpc2_objective(current, wd, config, params, stocking)
    return fn(u.reshape(-1))


def mpc2_solve(
    current: PopulationState,
    reference,
    config: Mpc2Config,
    params: ModelParams,
    stocking: StockingPolicy = NO_STOCKING,
    previous_input=None,
    warm_start=None,
) -> HorizonSolution:
    """Optimize feed and water-quality set-points jointly over the horizon.

    The returned inputs have shape (horizon, 4) in the order (feed,
    temperature, DO, UIA), each within its bounds. Baselines: all-lower,
    all-upper, hold-previous, and running at the water-quality references
    with full feed.
    """
    wd = _check_reference(reference, config.horizon)
    fn = _make_mpc2_objective(current, wd, config, params, stocking)
    n = config.horizon
    per_day = config.input_bounds
    bounds = [per_day[k] for _ in range(n) for k in range(4)]
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    t_ref, do_ref, uia_ref = config.input_refs
    ref_point = np.tile(
        [config.feed_bounds[1], t_ref, do_ref, uia_ref], n
    )
    baselines = [lower.copy(), upper.copy(), ref_point]
    if previous_input is not None:
        baselines.append(np.tile(np.asarray(previous_input, dtype=float), n))
    if warm_start is not None:
        baselines.append(np.asarray(warm_start, dtype=float).reshape(-1))
    x, fx, sweeps, converged = _solve_box(
        fn, bounds, baselines, config.max_sweeps, config.tol
    )
    return HorizonSolution(
        inputs=x.reshape(n, 4), objective=fx, sweeps=sweeps, converged=converged
    )
