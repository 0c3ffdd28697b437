"""PI-plus-feedforward spray controller with saturation and conditional anti-windup.

``compute_control`` evaluates the law literally on the error it is handed.
The loop wiring (see ``feedback_error``) turns the tracking error
``e = r - y`` into that controller-facing error: it flips the sign, because
spray cools and a cold outlet must close the valve, and divides by the
transmitter span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class GainVector:
    kp: float
    ki: float
    kff: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.kp, self.ki, self.kff)


BASELINE_GAINS = GainVector(1.2, 105.0, 0.0)


@dataclass(frozen=True)
class ControlConfig:
    u_min: float = 0.0  # kg/s
    u_max: float = 2.0  # kg/s
    t_gt_nominal: float = 530.0  # degC, feedforward regressor origin
    integral_clamp: float = 50.0  # span-normalised error * s
    error_span: float = 25.0  # degC of error that counts as "1"
    integral_scale: float = 1.5e-3  # 1/s per unit of ki
    actuation_sign: float = -1.0  # spray cools: hot outlet -> open valve
    baseline: GainVector = field(default_factory=lambda: BASELINE_GAINS)


@dataclass(frozen=True)
class ControllerState:
    integral: float = 0.0
    last_u_unsat: float = 0.0
    last_u_sat: float = 0.0


def feedback_error(r: float, y: float, cfg: ControlConfig) -> float:
    """Controller-facing error for tracking error ``r - y``."""
    return cfg.actuation_sign * (r - y) / cfg.error_span


def feedforward_regressor(t_gt: float, cfg: ControlConfig) -> float:
    return t_gt - cfg.t_gt_nominal


def unsaturated_output(gains: GainVector, e: float, integral: float, t_gt_dev: float,
                       cfg: ControlConfig) -> float:
    return (gains.kp * e + gains.ki * cfg.integral_scale * integral
            + gains.kff * t_gt_dev)


def compute_control(gains: GainVector, e: float, cstate: ControllerState, t_gt: float,
                    dt: float, cfg: ControlConfig = ControlConfig()
                    ) -> tuple[float, ControllerState]:
    """One control interval.

    The output uses the integral accumulated up to the start of the interval;
    the error is integrated afterwards unless the valve is pinned at a limit
    and the error would drive it further into that limit.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    t_gt_dev = feedforward_regressor(t_gt, cfg)
    u_unsat = unsaturated_output(gains, e, cstate.integral, t_gt_dev, cfg)
    u = min(max(u_unsat, cfg.u_min), cfg.u_max)
    # integral pushes u in the direction of sign(ki) * e
    push = e if gains.ki >= 0 else -e
    winding = (u_unsat > cfg.u_max and push > 0) or (u_unsat < cfg.u_min and push < 0)
    integral = cstate.integral
    if not winding:
        integral += e * dt
    integral = min(max(integral, -cfg.integral_clamp), cfg.integral_clamp)
    return u, ControllerState(integral, u_unsat, u)


def bumpless_state(gains: GainVector, u0: float, t_gt: float,
                   cfg: ControlConfig = ControlConfig(), e: float = 0.0) -> ControllerState:
    """Controller state whose output at controller-facing error ``e`` equals ``u0``."""
    rest = gains.kp * e + gains.kff * feedforward_regressor(t_gt, cfg)
    if gains.ki * cfg.integral_scale == 0:
        integral = 0.0
    else:
        integral = (u0 - rest) / (gains.ki * cfg.integral_scale)
    integral = min(max(integral, -cfg.integral_clamp), cfg.integral_clamp)
    return ControllerState(integral, u0, u0)


class FixedGainController:
    """The conventional PI baseline: gains never move."""

    name = "pi"

    def __init__(self, gains: GainVector = BASELINE_GAINS):
        if not all(math.isfinite(g) for g in gains.as_tuple()):
            raise ValueError("gains must be finite")
        self._gains = gains

    def gains_at(self, t: float) -> GainVector:
        return self._gains


def fixed_pi_controller(cfg: ControlConfig = ControlConfig()) -> FixedGainController:
    return FixedGainController(cfg.baseline)
