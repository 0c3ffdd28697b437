"""Lumped superheater / desuperheater dynamics with an additive spray-valve leak.

States are the superheater outlet temperature ``x1`` (the measured output)
and the desuperheater outlet temperature ``x2``, both in degC.  The leak
``f`` enters the desuperheater balance exactly like extra spray flow, so
``f`` and ``u`` only ever appear as the sum ``u + f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

T_MIN = 0.0
T_MAX = 700.0
MAX_SUBSTEP = 0.25


class ModelBlowupError(RuntimeError):
    """Raised when the plant leaves its physical envelope or produces NaN/inf."""


@dataclass(frozen=True)
class PlantState:
    x1: float  # superheater outlet, degC
    x2: float  # desuperheater outlet, degC

    @property
    def y(self) -> float:
        return self.x1


@dataclass(frozen=True)
class PlantConstants:
    k1: float  # degC*kg/s per kg/s of fuel (lumped heat-input gain)
    k2: float  # superheater rate constant, 1/kg
    k3: float  # desuperheater rate constant, 1/kg

    def __post_init__(self):
        if not (self.k2 > 0 and self.k3 > 0 and math.isfinite(self.k1)):
            raise ValueError(f"invalid plant constants {self}")


@dataclass(frozen=True)
class DisturbanceFrame:
    d1: float  # fuel mass flow, kg/s
    d2: float  # steam mass flow, kg/s
    d3: float  # ambient temperature rate, degC/s
    d4: float  # DSH inlet temperature, degC
    d5: float  # spray water temperature, degC
    d6: float  # DSH inlet temperature rate, degC/s
    d7: float  # DSH outlet mass flow, kg/s
    m_in_dsh_bar: float  # mean DSH inlet mass flow, kg/s
    t_gt: float  # gas turbine exhaust temperature, degC

    def validate(self) -> None:
        vals = (self.d1, self.d2, self.d3, self.d4, self.d5, self.d6, self.d7,
                self.m_in_dsh_bar, self.t_gt)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite disturbance frame {self}")
        if self.d2 <= 0 or self.d7 <= 0:
            raise ValueError("steam flows d2 and d7 must be positive")
        if self.d4 <= self.d5:
            raise ValueError("DSH inlet steam must be hotter than the spray water")

    def with_outlet_flow(self, u: float, f: float = 0.0) -> "DisturbanceFrame":
        """Frame with d7 set from the DSH mass balance ``d2 + u + f``."""
        return replace(self, d7=self.d2 + u + f)


@dataclass(frozen=True)
class FaultSpec:
    leak_flow: float = 0.0  # kg/s
    onset_time: float = 0.0  # s
    max_leak: float = 1.0  # kg/s

    def __post_init__(self):
        if not 0.0 <= self.leak_flow <= self.max_leak:
            raise ValueError(f"leak flow {self.leak_flow} outside [0, {self.max_leak}]")

    def flow_at(self, t: float) -> float:
        return self.leak_flow if t >= self.onset_time else 0.0


def _rates(x1, x2, u, d, c, f):
    spray = u + f
    dx1 = c.k2 * (c.k1 * d.d1 + d.d7 * (x2 - x1) - d.d3)
    dx2 = c.k3 * ((d.d2 + spray) * (d.d4 - x2) - spray * (d.d4 - d.d5)
                  + d.m_in_dsh_bar * d.d6)
    return dx1, dx2


def plant_derivatives(state: PlantState, u: float, d: DisturbanceFrame,
                      c: PlantConstants, f: float = 0.0) -> tuple[float, float]:
    """Right-hand side of the two-state model, in degC/s."""
    dx1, dx2 = _rates(state.x1, state.x2, u, d, c, f)
    if not math.isfinite(dx1):
        raise ModelBlowupError(f"superheater rate dx1 is {dx1} at {state}")
    if not math.isfinite(dx2):
        raise ModelBlowupError(f"desuperheater rate dx2 is {dx2} at {state}")
    return dx1, dx2


def check_state(x1: float, x2: float, t: float | None = None) -> None:
    where = "" if t is None else f" at t={t:g}s"
    for name, v in (("x1", x1), ("x2", x2)):
        if not math.isfinite(v) or not T_MIN <= v <= T_MAX:
            raise ModelBlowupError(
                f"{name}={v!r}{where} left the [{T_MIN:g}, {T_MAX:g}] degC envelope")


def step(state: PlantState, u: float, d: DisturbanceFrame, c: PlantConstants,
         f: float = 0.0, dt: float = 1.0) -> PlantState:
    """Advance ``dt`` seconds with fixed-step RK4, substeps no longer than 0.25 s.

    Inputs (``u``, ``f`` and the disturbance frame) are held constant over
    the interval.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = max(1, math.ceil(dt / MAX_SUBSTEP - 1e-12))
    h = dt / n
    x1, x2 = state.x1, state.x2
    for _ in range(n):
        a1, a2 = _rates(x1, x2, u, d, c, f)
        b1, b2 = _rates(x1 + 0.5 * h * a1, x2 + 0.5 * h * a2, u, d, c, f)
        c1, c2 = _rates(x1 + 0.5 * h * b1, x2 + 0.5 * h * b2, u, d, c, f)
        e1, e2 = _rates(x1 + h * c1, x2 + h * c2, u, d, c, f)
        x1 += h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + e1)
        x2 += h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + e2)
    check_state(x1, x2)
    return PlantState(x1, x2)


def steady_state(u: float, d: DisturbanceFrame, c: PlantConstants,
                 f: float = 0.0) -> PlantState:
    """Closed-form fixed point for a frame with ``d6 = 0``.

    Uses the frame's own ``d7``; call ``d.with_outlet_flow(u, f)`` first to
    honour the mass balance.
    """
    total = d.d2 + u + f
    if total <= 0:
        raise ZeroDivisionError("d2 + u + f must be positive")
    if d.d7 <= 0:
        raise ZeroDivisionError("d7 must be positive")
    x2 = d.d4 - (u + f) * (d.d4 - d.d5) / total
    x1 = x2 + (c.k1 * d.d1 - d.d3) / d.d7
    return PlantState(x1, x2)


def steady_state_gain(u: float, d: DisturbanceFrame, c: PlantConstants,
                      f: float = 0.0) -> float:
    """d(y_ss)/du with d7 following the mass balance; negative for spray cooling."""
    total = d.d2 + u + f
    dx2 = -(d.d4 - d.d5) * d.d2 / total ** 2
    dx1_extra = -(c.k1 * d.d1 - d.d3) / total ** 2
    return dx2 + dx1_extra


def midpoint_rates(state_prev: PlantState, state_next: PlantState,
                   dt: float) -> tuple[PlantState, tuple[float, float]]:
    """Midpoint state and backward-difference rates over one interval."""
    mid = PlantState(0.5 * (state_prev.x1 + state_next.x1),
                     0.5 * (state_prev.x2 + state_next.x2))
    rates = ((state_next.x1 - state_prev.x1) / dt, (state_next.x2 - state_prev.x2) / dt)
    return mid, rates
