"""Fit the lumped plant constants to a target operating point.

Rate constants come from the two residence times; the heat-input product
``k1 * d1`` is whatever holds ``y = y_target`` at ``u = u_target``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .config import ControlConfig, PlantConfig
from .plant import steady_state


class CalibrationInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationReport:
    plant: PlantConfig
    heat_input: float  # k1 * d1
    x2_eq: float
    y_eq: float
    residual: float  # |y_eq - y_target|

    @property
    def ok(self) -> bool:
        return self.residual <= 1e-6


def calibrate(pc: PlantConfig, cc: ControlConfig = ControlConfig()) -> CalibrationReport:
    """Calibrated copy of ``pc`` plus the steady-state check at the target point.

    Raises ``CalibrationInfeasible`` when the target spray lies outside the
    valve range, or when the target outlet temperature is not above what the
    desuperheater delivers at that spray (that would need a negative heat
    input).
    """
    u = pc.u_target
    if not cc.u_min <= u <= cc.u_max:
        raise CalibrationInfeasible(
            f"target spray {u} kg/s outside the valve range [{cc.u_min}, {cc.u_max}]")
    flow = pc.d2 + u
    k2 = 1.0 / (pc.tau_sh * flow)
    k3 = 1.0 / (pc.tau_dsh * flow)
    d4 = pc.dsh_inlet(pc.t_gt_nominal)
    x2 = d4 - u * (d4 - pc.d5) / flow
    heat = (pc.y_target - x2) * flow + pc.d3
    if heat <= 0:
        raise CalibrationInfeasible(
            f"target y={pc.y_target} degC is not above the desuperheater outlet "
            f"{x2:.4f} degC at u={u} kg/s; achievable targets lie in ({x2:.4f}, inf) degC")
    cal = replace(pc, k1=heat / pc.d1, k2=k2, k3=k3)
    ss = steady_state(u, cal.frame(pc.t_gt_nominal, 0.0, u), cal.constants())
    return CalibrationReport(cal, heat, ss.x2, ss.x1, abs(ss.x1 - pc.y_target))
