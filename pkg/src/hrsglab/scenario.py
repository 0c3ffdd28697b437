"""Closed-loop experiments: schedules, the 1 s control loop, traces on disk."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol

import numpy as np
import yaml
from scipy.optimize import brentq

from .config import LabConfig, SEED_COMPONENTS
from .control import (ControllerState, FixedGainController, GainVector, bumpless_state,
                      compute_control, feedback_error)
from .pinn_tuner import PinnLossBreakdown, StepContext
from .plant import (FaultSpec, ModelBlowupError, PlantState, midpoint_rates, steady_state,
                    steady_state_gain, step)

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "r", "y", "e", "u", "kp", "ki", "kff", "f", "t_gt", "x1", "x2",
                 "l_data", "l_phys", "param_norm")

Knots = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    duration: float
    setpoint: Knots  # piecewise-linear (t, degC)
    t_gt: Knots  # piecewise-linear (t, degC)
    fault: FaultSpec = field(default_factory=FaultSpec)
    load: Knots | None = None  # MW, informational
    steam_flow: Knots | None = None  # kg/s; None means the plant nominal
    noise_sigma: float = 0.0
    seed: int = 0
    dt: float = 1.0
    fault_free: bool = True  # provenance tag for training data

    def __post_init__(self):
        for name in ("setpoint", "t_gt"):
            knots = getattr(self, name)
            if not knots or knots[0][0] > 0 or knots[-1][0] < self.duration:
                raise ValueError(f"{name} schedule must cover [0, {self.duration}]")
        lo, hi = min(v for _, v in self.t_gt), max(v for _, v in self.t_gt)
        if lo < 530.0 - 1e-9 or hi > 580.0 + 1e-9:
            raise ValueError(f"t_gt schedule leaves [530, 580] degC: [{lo}, {hi}]")
        if self.dt <= 0 or self.duration <= 0:
            raise ValueError("duration and dt must be positive")
        if self.fault.leak_flow > 0 and self.fault_free:
            object.__setattr__(self, "fault_free", False)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt

    @staticmethod
    def _interp(knots: Knots, t):
        ts, vs = zip(*knots)
        return np.interp(t, ts, vs)

    def r_at(self, t):
        return self._interp(self.setpoint, t)

    def t_gt_at(self, t):
        return self._interp(self.t_gt, t)


MW_PER_DEGC = 1.0  # load/exhaust-temperature coupling of the ramp-and-leak scenario


def build_paper_scenario(leak_flow: float = 0.5, onset: float = 1000.0,
                         duration: float = 3600.0, ramp_start: float = 600.0,
                         seed: int = 0) -> ScenarioSpec:
    """Load ramp (+30 MW at 6 MW/min -> 530..560 degC) plus a spray-valve leak."""
    ramp_minutes = 30.0 / 6.0
    ramp_end = ramp_start + 60.0 * ramp_minutes
    t_gt = ((0.0, 530.0), (ramp_start, 530.0), (ramp_end, 560.0), (duration, 560.0))
    load = tuple((t, (v - 530.0) * MW_PER_DEGC) for t, v in t_gt)
    return ScenarioSpec(
        name="paper", duration=duration, setpoint=((0.0, 515.0), (duration, 515.0)),
        t_gt=t_gt, load=load, fault=FaultSpec(leak_flow, onset, 1.0), seed=seed)


def build_null_scenario(duration: float = 3600.0, seed: int = 0) -> ScenarioSpec:
    return ScenarioSpec(name="null", duration=duration,
                        setpoint=((0.0, 515.0), (duration, 515.0)),
                        t_gt=((0.0, 530.0), (duration, 530.0)), seed=seed)


def _knots(v) -> Knots | None:
    if v is None:
        return None
    return tuple((float(a), float(b)) for a, b in v)


def scenario_from_dict(data: dict) -> ScenarioSpec:
    data = dict(data)
    fault = FaultSpec(**data.pop("fault", {}))
    for key in ("setpoint", "t_gt", "load", "steam_flow"):
        if key in data:
            data[key] = _knots(data[key])
    return ScenarioSpec(fault=fault, **data)


def load_scenario(path) -> ScenarioSpec:
    return scenario_from_dict(yaml.safe_load(Path(path).read_text()))


@dataclass(frozen=True)
class Observation:
    t: float
    r: float
    y: float
    e: float
    t_gt: float
    u_prev: float


class GainScheduler(Protocol):
    name: str

    def reset(self) -> None: ...

    def gains(self, obs: Observation) -> GainVector: ...

    def after_step(self, ctx: StepContext) -> PinnLossBreakdown | None: ...


class FixedGainScheduler:
    def __init__(self, controller: FixedGainController, name: str = "pi"):
        self.controller = controller
        self.name = name

    def reset(self) -> None:
        pass

    def gains(self, obs: Observation) -> GainVector:
        return self.controller.gains_at(obs.t)

    def after_step(self, ctx: StepContext) -> None:
        return None


@dataclass(frozen=True)
class TraceRecord:
    t: float
    r: float
    y: float
    e: float
    u: float
    gains: GainVector
    f: float
    t_gt: float
    x1: float
    x2: float
    loss: PinnLossBreakdown | None = None
    param_norm: float | None = None

    def row(self) -> tuple:
        ld = lp = None
        if self.loss is not None:
            ld, lp = self.loss.data_loss, self.loss.physics_loss
        return (self.t, self.r, self.y, self.e, self.u, self.gains.kp, self.gains.ki,
                self.gains.kff, self.f, self.t_gt, self.x1, self.x2, ld, lp,
                self.param_norm)


class Trace:
    """Ordered TraceRecords with column access as float arrays (NaN where absent)."""

    def __init__(self, records=None, controller: str = "", scenario: str = ""):
        self.records: list[TraceRecord] = list(records or [])
        self.controller = controller
        self.scenario = scenario
        self._cols: dict[str, np.ndarray] | None = None

    def append(self, rec: TraceRecord) -> None:
        if self.records and not rec.t > self.records[-1].t:
            raise ValueError("trace time must increase strictly")
        self.records.append(rec)
        self._cols = None

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        if self._cols is None:
            rows = [r.row() for r in self.records]
            table = np.array([[np.nan if v is None else v for v in row] for row in rows],
                             dtype=float).reshape(len(rows), len(TRACE_COLUMNS))
            self._cols = {c: table[:, i] for i, c in enumerate(TRACE_COLUMNS)}
        return self._cols[name]

    def __getattr__(self, name):
        if name in TRACE_COLUMNS:
            return self.column(name)
        raise AttributeError(name)

    @property
    def dt(self) -> float:
        return float(self.records[1].t - self.records[0].t) if len(self) > 1 else 1.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for rec in self.records:
                w.writerow(["" if v is None else repr(float(v)) for v in rec.row()])

    @classmethod
    def read_csv(cls, path, controller: str = "") -> "Trace":
        tr = cls(controller=controller)
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            for row in rd:
                v = {k: (None if row[k] == "" else float(row[k])) for k in TRACE_COLUMNS}
                loss = None
                if v["l_data"] is not None:
                    loss = PinnLossBreakdown(v["l_data"], v["l_phys"], math.nan, math.nan)
                tr.append(TraceRecord(v["t"], v["r"], v["y"], v["e"], v["u"],
                                      GainVector(v["kp"], v["ki"], v["kff"]), v["f"],
                                      v["t_gt"], v["x1"], v["x2"], loss, v["param_norm"]))
        return tr


class ScenarioAborted(RuntimeError):
    def __init__(self, message: str, trace: Trace):
        super().__init__(message)
        self.trace = trace


def equilibrium_input(spec: ScenarioSpec, cfg: LabConfig) -> tuple[float, PlantState]:
    """Spray flow and plant state that hold y = r(0) at the t = 0 conditions."""
    pc, c, cc = cfg.plant, cfg.plant.constants(), cfg.control
    t_gt0 = float(spec.t_gt_at(0.0))
    d2 = float(spec._interp(spec.steam_flow, 0.0)) if spec.steam_flow else pc.d2
    f0 = spec.fault.flow_at(0.0)
    r0 = float(spec.r_at(0.0))

    def y_of(u):
        return steady_state(u, pc.frame(t_gt0, 0.0, u, f0, d2), c, f0).x1 - r0

    lo, hi = y_of(cc.u_min), y_of(cc.u_max)
    if lo <= 0:
        u0 = cc.u_min
    elif hi >= 0:
        u0 = cc.u_max
    else:
        u0 = brentq(y_of, cc.u_min, cc.u_max, xtol=1e-14, rtol=1e-15)
    return u0, steady_state(u0, pc.frame(t_gt0, 0.0, u0, f0, d2), c, f0)


def run_scenario(spec: ScenarioSpec, scheduler: GainScheduler, cfg: LabConfig,
                 partial_path=None) -> Trace:
    """Run the 1 s loop; identical (spec, scheduler state, cfg) give identical traces.

    On a plant blowup the partial trace is written to ``partial_path`` (if
    given) and attached to the raised ``ScenarioAborted``.
    """
    pc, c, cc = cfg.plant, cfg.plant.constants(), cfg.control
    dt = spec.dt
    times = spec.times()
    r_s = spec.r_at(times)
    tgt_s = spec.t_gt_at(times)
    d2_s = spec._interp(spec.steam_flow, times) if spec.steam_flow else np.full(len(times), pc.d2)
    noise = np.zeros(len(times))
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(np.random.SeedSequence(
            spec.seed, spawn_key=(SEED_COMPONENTS["sensor_noise"],)))
        noise = rng.normal(0.0, spec.noise_sigma, size=len(times))

    scheduler.reset()
    u0, state = equilibrium_input(spec, cfg)
    trace = Trace(controller=scheduler.name, scenario=spec.name)
    cstate = ControllerState()
    u_prev = u0
    d4_prev = pc.dsh_inlet(float(tgt_s[0]))
    track_norm = hasattr(scheduler, "param_norm")
    try:
        for k in range(len(times)):
            t = float(times[k])
            r, t_gt, d2 = float(r_s[k]), float(tgt_s[k]), float(d2_s[k])
            d4 = pc.dsh_inlet(t_gt)
            d6 = (d4 - d4_prev) / dt if k else 0.0
            d4_prev = d4
            f = spec.fault.flow_at(t)
            y = state.x1 + float(noise[k])
            e = r - y
            gains = scheduler.gains(Observation(t, r, y, e, t_gt, u_prev))
            if k == 0:
                cstate = bumpless_state(gains, u0, t_gt, cc)
            e_ctrl = feedback_error(r, y, cc)
            before = cstate
            u, cstate = compute_control(gains, e_ctrl, cstate, t_gt, dt, cc)
            frame = pc.frame(t_gt, d6, u, f, d2)
            new_state = step(state, u, frame, c, f, dt)
            y_next = new_state.x1 + float(noise[k + 1] if k + 1 < len(noise) else noise[k])
            ctrl_frame = pc.frame(t_gt, d6, u, 0.0, d2)
            mid, rates = midpoint_rates(state, new_state, dt)
            if hasattr(scheduler, "smooth_rates"):
                rates = scheduler.smooth_rates(rates)
            ctx = StepContext(e=e, y=y, t_gt=t_gt, e_ctrl=e_ctrl, cstate=before,
                              u_applied=u, e_next=r - y_next, state_mid=mid, rates=rates,
                              frame=ctrl_frame,
                              plant_gain=-steady_state_gain(u, ctrl_frame, c))
            loss = scheduler.after_step(ctx)
            trace.append(TraceRecord(t, r, y, e, u, gains, f, t_gt, state.x1, state.x2,
                                     loss, scheduler.param_norm() if track_norm else None))
            state = new_state
            u_prev = u
    except ModelBlowupError as exc:
        if partial_path is not None:
            trace.write_csv(partial_path)
        raise ScenarioAborted(f"{spec.name}/{scheduler.name}: {exc}", trace) from exc
    return trace


def disturbance_time(spec: ScenarioSpec) -> float:
    """Reference time for settling: the fault onset, or t = 0 without a fault in the run."""
    onset = spec.fault.onset_time
    return onset if spec.fault.leak_flow > 0 and onset < spec.duration else 0.0


@dataclass
class ComparisonBundle:
    spec: ScenarioSpec
    traces: dict[str, Trace]
    rows: list  # KpiRow, in the order the controllers were requested
    failed: dict[str, str] = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.failed)

    def write(self, out_dir) -> dict[str, Path]:
        from .report import render_report

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = render_report(self.rows, list(self.traces.values()), out)
        for name, tr in self.traces.items():
            path = out / f"trace_{name}.csv"
            tr.write_csv(path)
            files[f"trace_{name}"] = path
        if self.failed:
            path = out / "FAILED.txt"
            path.write_text("".join(f"{k}: {v}\n" for k, v in sorted(self.failed.items())))
            files["failed"] = path
        return files


def run_comparison(spec: ScenarioSpec, schedulers: dict, cfg: LabConfig) -> ComparisonBundle:
    """Run every scheduler on the same spec, one after another.

    A controller whose run aborts contributes its partial trace but no KPI
    row, and the bundle is flagged partial.
    """
    from .metrics import kpi_row

    traces: dict[str, Trace] = {}
    rows = []
    failed: dict[str, str] = {}
    t_d = disturbance_time(spec)
    for name, sched in schedulers.items():
        try:
            tr = run_scenario(spec, sched, cfg)
        except ScenarioAborted as exc:
            log.error("%s", exc)
            failed[name] = str(exc)
            exc.trace.controller = name
            traces[name] = exc.trace
            continue
        tr.controller = name
        traces[name] = tr
        rows.append(kpi_row(tr, name, disturbance_time=t_d))
    return ComparisonBundle(spec, traces, rows, failed)
