"""Closed-loop performance indicators computed from traces.

Each function accepts either a ``Trace`` or plain arrays.  Sums are left
Riemann sums at the trace's sample period.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOT_SETTLED = math.inf  # settling_time result when the error never stays in band


class EmptyTraceError(ValueError):
    pass


def _window(trace, name: str, window=None) -> tuple[np.ndarray, np.ndarray, float]:
    if isinstance(trace, (np.ndarray, list, tuple)):
        values = np.asarray(trace, dtype=float)
        t = np.arange(len(values), dtype=float)
        dt = 1.0
    else:
        values = np.asarray(getattr(trace, name), dtype=float)
        t = np.asarray(trace.t, dtype=float)
        dt = trace.dt
    if window is not None:
        lo, hi = window
        keep = (t >= lo) & (t < hi)
        values, t = values[keep], t[keep]
    if values.size == 0:
        raise EmptyTraceError("no samples in the evaluation window")
    return values, t, dt


def iae(trace, dt: float | None = None, window=None) -> float:
    """Integral of |e| over the window (degC*s)."""
    e, _, step = _window(trace, "e", window)
    return float(np.abs(e).sum() * (step if dt is None else dt))


def max_overshoot(trace, window=None) -> float:
    """Largest excursion of y above r (degC); 0 if y never exceeds r."""
    if isinstance(trace, (np.ndarray, list, tuple)):
        e = np.asarray(trace, dtype=float)
        if e.size == 0:
            raise EmptyTraceError("no samples")
    else:
        e, _, _ = _window(trace, "e", window)
    return float(max(0.0, float(np.max(-e))))


def overshoot_from(y, r) -> float:
    y, r = np.asarray(y, dtype=float), np.asarray(r, dtype=float)
    if y.size == 0:
        raise EmptyTraceError("no samples")
    return float(max(0.0, float(np.max(y - r))))


def settling_time(trace, band: float = 1.0, disturbance_time: float = 0.0) -> float:
    """Time after ``disturbance_time`` from which |e| stays within ``band``.

    Returns 0 when the error never leaves the band, and ``NOT_SETTLED`` when
    the last sample is still outside it.
    """
    e, t, dt = _window(trace, "e")
    if not t[0] <= disturbance_time <= t[-1]:
        raise ValueError(f"disturbance time {disturbance_time} outside the trace")
    after = t >= disturbance_time
    e, t = e[after], t[after]
    outside = np.flatnonzero(np.abs(e) > band)
    if outside.size == 0:
        return 0.0
    last = outside[-1]
    if last == len(e) - 1:
        return NOT_SETTLED
    return float(t[last + 1] - disturbance_time)


def control_effort_variance(trace, window=None) -> float:
    """Population variance of u over the window ((kg/s)^2)."""
    u, _, _ = _window(trace, "u", window)
    if u.size < 2:
        raise EmptyTraceError("need at least two samples of u")
    return float(np.var(u))


@dataclass(frozen=True)
class KpiRow:
    controller: str
    iae: float
    mo: float
    ts: float  # NOT_SETTLED when the error never stays in band
    cev: float

    @property
    def settled(self) -> bool:
        return self.ts != NOT_SETTLED


def kpi_row(trace, controller: str | None = None, disturbance_time: float = 0.0,
            band: float = 1.0, window=None) -> KpiRow:
    return KpiRow(controller if controller is not None else trace.controller,
                  iae(trace, window=window), max_overshoot(trace, window=window),
                  settling_time(trace, band, disturbance_time),
                  control_effort_variance(trace, window=window))
