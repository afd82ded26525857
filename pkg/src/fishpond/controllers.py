"""Classical daily feeding controllers: bang-bang and discrete PID.

Both observe the mean fish weight once per day and choose the relative
feeding rate for that day. Controller memory is carried in an explicit
state value, so the functions themselves are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PidGains", "ControllerState", "bangbang_feed", "pid_feed"]

FEED_FLOOR = 0.1
FEED_CEIL = 1.0


@dataclass(frozen=True)
class PidGains:
    """PID gains and feed saturation bounds."""

    kp: float = 0.1
    ki: float = 12.0
    kd: float = 0.01
    f_min: float = FEED_FLOOR
    f_max: float = FEED_CEIL

    def __post_init__(self) -> None:
        if not self.f_min < self.f_max:
            raise ValueError("feed bounds must satisfy f_min < f_max")


@dataclass(frozen=True)
class ControllerState:
    """Discrete PID memory; start each episode from a fresh instance."""

    integral: float = 0.0
    previous_error: float = 0.0
    initialized: bool = False


def bangbang_feed(mean_weight: float, desired_weight: float) -> float:
    """On-off feeding: full ration while underweight, minimum otherwise.

    Full feed (1.0) offers 10% of body weight for the day, the floor (0.1)
    offers 1%, so the fish are fed every day either way.
    """
    if desired_weight <= 0.0:
        raise ValueError("desired weight must be positive")
    return 1.0 if desired_weight - mean_weight > 0.0 else FEED_FLOOR


def pid_feed(
    mean_weight: float,
    desired_weight: float,
    state: ControllerState,
    gains: PidGains,
    dt: float = 1.0,
) -> tuple[float, ControllerState]:
    """One discrete PID step; returns the saturated feed and the new state.

    Rectangle-rule integral, backward-difference derivative (zero on the
    first call). Anti-windup by conditional integration: the accumulator is
    left unchanged whenever the raw output saturates, otherwise multi-week
    overshoot follows the first reference crossover at these gain scales.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    error = desired_weight - mean_weight
    derivative = (error - state.previous_error) / dt if state.initialized else 0.0
    candidate = state.integral + error * dt
    raw = gains.kp * error + gains.ki * candidate + gains.kd * derivative
    feed = min(max(raw, gains.f_min), gains.f_max)
    integral = state.integral if raw != feed else candidate
    return feed, ControllerState(
        integral=integral, previous_error=error, initialized=True
    )
