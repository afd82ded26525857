"""Model-free feeding control by tabular Q-learning.

The agent observes the normalized weight-tracking error, discretized on a
variable-resolution grid (finer bins near zero error), and picks one of a
fixed set of relative feed levels each day. Rewards penalize squared
tracking error plus a weighted squared feed, so the learned policy trades
growth against ration size.

``train`` works against a tiny episodic-environment protocol (``reset``,
``step``, ``n_states``, ``n_actions``), so the same loop drives both the
pond tracking environment defined here and hand-built test problems.
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .growth import ModelParams, StockingPolicy, NO_STOCKING, advance_day, daily_rates

__all__ = [
    "QConfig",
    "QTable",
    "discretize_state",
    "reward",
    "td_update",
    "greedy_action",
    "greedy_feed",
    "TrackingEnv",
    "train",
]

DEFAULT_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_ACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class QConfig:
    """Learning hyperparameters, state grid and action set."""

    alpha: float = 0.1
    gamma: float = 0.95
    epsilon: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.01
    episodes: int = 2000
    feed_weight: float = 0.6    # reward penalty on squared feed
    grid: tuple[float, ...] = DEFAULT_GRID   # positive bin edges, mirrored
    actions: tuple[float, ...] = DEFAULT_ACTIONS

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not self.actions:
            raise ValueError("action set must be nonempty")
        if any(a < 0.1 or a > 1.0 for a in self.actions):
            raise ValueError("actions must lie within [0.1, 1.0]")
        if list(self.actions) != sorted(self.actions):
            raise ValueError("actions must be sorted ascending")
        if list(self.grid) != sorted(self.grid) or self.grid[0] <= 0.0:
            raise ValueError("grid edges must be positive and ascending")

    @property
    def edges(self) -> tuple[float, ...]:
        """Full signed bin-edge list, symmetric about zero error."""
        return tuple(-g for g in reversed(self.grid)) + self.grid

    @property
    def n_states(self) -> int:
        return len(self.edges) + 1

    @property
    def n_actions(self) -> int:
        return len(self.actions)


def discretize_state(mean_weight: float, desired_weight: float,
                     config: QConfig) -> int:
    """Bin the normalized tracking error (w - w_d)/w_d.

    Variable resolution: narrow bins near zero error, wide bins and clamp
    bins toward the extremes, so states stay meaningful across the whole
    growth trajectory.
    """
    if desired_weight <= 0.0:
        raise ValueError("desired weight must be positive")
    err = (mean_weight - desired_weight) / desired_weight
    return bisect_left(config.edges, err)


def reward(mean_weight: float, desired_weight: float, feed: float,
           weight: float) -> float:
    """Reward <= 0: negated squared tracking error plus feed penalty.

    The relative error is clamped to [-1, 1] so rewards stay bounded even
    for a collapsed pond, which keeps the value function bounded as well.
    """
    if desired_weight <= 0.0:
        raise ValueError("desired weight must be positive")
    err = (mean_weight - desired_weight) / desired_weight
    err = min(max(err, -1.0), 1.0)
    return -(err * err + weight * feed * feed)


@dataclass
class QTable:
    """Dense action-value table, zero-initialized."""

    values: np.ndarray

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "QTable":
        return cls(values=np.zeros((n_states, n_actions)))

    def greedy_policy(self) -> np.ndarray:
        """Greedy action per state; ties break to the lowest action index."""
        return np.argmax(self.values, axis=1)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state_index", "action_index", "value"])
            for s in range(self.values.shape[0]):
                for a in range(self.values.shape[1]):
                    writer.writerow([s, a, f"{self.values[s, a]:.12g}"])

    @classmethod
    def from_csv(cls, path: str) -> "QTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                rows.append((int(row["state_index"]), int(row["action_index"]),
                             float(row["value"])))
        n_states = max(r[0] for r in rows) + 1
        n_actions = max(r[1] for r in rows) + 1
        values = np.zeros((n_states, n_actions))
        for s, a, v in rows:
            values[s, a] = v
        return cls(values=values)


def td_update(q: QTable, s: int, a: int, r: float, s_next: int,
              config: QConfig) -> QTable:
    """One temporal-difference backup on the visited state-action pair."""
    target = r + config.gamma * float(np.max(q.values[s_next]))
    q.values[s, a] += config.alpha * (target - q.values[s, a])
    return q


def greedy_action(q: QTable, s: int) -> int:
    """Best action index at state ``s``; ties break to the lowest feed."""
    return int(np.argmax(q.values[s]))


def greedy_feed(q: QTable, config: QConfig, mean_weight: float,
                desired_weight: float) -> float:
    """Feed level the trained table prescribes for the observed weights."""
    s = discretize_state(mean_weight, desired_weight, config)
    return config.actions[greedy_action(q, s)]


class TrackingEnv:
    """Episodic pond environment for weight-reference tracking.

    Each episode replays the culture period from the same initial stock
    under the given water-quality profiles; the action is the day's feed
    level. The reward is evaluated on the post-transition mean weight
    against the next reference point.
    """

    def __init__(
        self,
        reference,
        profile,
        params: ModelParams,
        config: QConfig,
        population: int,
        initial_weight: float = 6.24,
        stocking: StockingPolicy = NO_STOCKING,
        substeps: int = 4,
    ):
        self.reference = np.asarray(reference, dtype=float)
        self.period = len(profile.temperature)
        if len(self.reference) < self.period + 1:
            raise ValueError("reference must cover every day of the period")
        self.params = params
        self.config = config
        self.population = population
        self.initial_weight = initial_weight
        self.stocking = stocking
        self.substeps = substeps
        # Water quality is exogenous here, so the day rates never change.
        self._rates = [
            daily_rates(profile.temperature[t], profile.oxygen[t],
                        profile.ammonia[t], params)
            for t in range(self.period)
        ]
        self._xi = 0.0
        self._p = 0
        self._day = 0

    @property
    def n_states(self) -> int:
        return self.config.n_states

    @property
    def n_actions(self) -> int:
        return self.config.n_actions

    def _observe(self) -> int:
        w = self._xi / self._p if self._p > 0 else 0.0
        return discretize_state(w, self.reference[self._day], self.config)

    def reset(self) -> int:
        self._xi = self.population * self.initial_weight
        self._p = self.population
        self._day = 0
        return self._observe()

    def step(self, action: int) -> tuple[int, float, bool]:
        feed = self.config.actions[action]
        gain, loss, k1 = self._rates[self._day]
        self._xi, self._p, _ = advance_day(
            self._xi, self._p, feed, gain, loss, k1,
            self.stocking, self.params, self.substeps,
        )
        self._day += 1
        w = self._xi / self._p if self._p > 0 else 0.0
        r = reward(w, self.reference[self._day], feed, self.config.feed_weight)
        done = self._day >= self.period
        return self._observe(), r, done


def train(env, config: QConfig, seed: int = 0) -> tuple[QTable, np.ndarray]:
    """Run epsilon-greedy episodes and return the table and policy errors.

    The policy error after each episode is the fraction of states whose
    greedy action changed relative to the previous episode. Training is
    reproducible: all exploration randomness comes from ``seed``.
    """
    rng = np.random.default_rng(seed)
    q = QTable.zeros(env.n_states, env.n_actions)
    policy_errors = np.empty(config.episodes)
    prev_policy = q.greedy_policy()
    epsilon = config.epsilon
    for episode in range(config.episodes):
        s = env.reset()
        done = False
        while not done:
            if rng.random() < epsilon:
                a = int(rng.integers(env.n_actions))
            else:
                a = greedy_action(q, s)
            s_next, r, done = env.step(a)
            td_update(q, s, a, r, s_next, config)
            s = s_next
        policy = q.greedy_policy()
        policy_errors[episode] = np.mean(policy != prev_policy)
        prev_policy = policy
        epsilon = max(config.epsilon_floor, epsilon * config.epsilon_decay)
    return q, policy_errors
