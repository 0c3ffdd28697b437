"""Offline-trained LSTM gain scheduler.

Pipeline:

1. ``operating_scenarios`` draws fault-free operating days (load ramps,
   setpoint moves, steam-flow swings) that run under the baseline PI.
2. ``generate_dataset`` cuts those runs into fixed-length segments and,
   per segment, searches the gain box for the triple with the smallest
   integral of squared error when the segment is replayed in closed loop.
3. ``train`` fits a two-layer LSTM from windows of ``[e, y, t_gt, u_prev]``
   to the segment's target gains.
4. ``LstmScheduler`` runs the frozen network inside the control loop.
"""
from __future__ import annotations

import csv
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .config import GainBox, InputScaling, LabConfig, LstmConfig, rng_for
from .control import (ControllerState, GainVector, bumpless_state, compute_control,
                      feedback_error, fixed_pi_controller)
from .nn import (AdamState, LstmCell, MLP, adam_step, dense_backward, dense_forward,
                 init_lstm, init_mlp, load_arrays, lstm_backward, lstm_forward, save_arrays)
from .plant import PlantState, step

log = logging.getLogger(__name__)

N_FEATURES = 4  # e, y, t_gt, u_prev


# ---------------------------------------------------------------- windows

class StateWindow:
    """Ring buffer of the last ``capacity`` raw samples ``[e, y, t_gt, u_prev]``."""

    def __init__(self, capacity: int, scaling: InputScaling = InputScaling()):
        if capacity < 1:
            raise ValueError("window capacity must be positive")
        self.capacity = capacity
        self.scaling = scaling
        self._buf: deque = deque(maxlen=capacity)

    def push(self, e: float, y: float, t_gt: float, u_prev: float) -> None:
        self._buf.append((e, y, t_gt, u_prev))

    def clear(self) -> None:
        self._buf.clear()

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def full(self) -> bool:
        return len(self._buf) == self.capacity

    def matrix(self) -> np.ndarray:
        """Normalised (N, 4) window, oldest sample first."""
        if not self.full:
            raise ValueError(f"window holds {len(self)} of {self.capacity} samples")
        return normalise_samples(np.array(self._buf, dtype=float), self.scaling)


def normalise_samples(raw: np.ndarray, scaling: InputScaling) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    out = np.empty_like(raw)
    out[..., 0] = scaling.e(raw[..., 0])
    out[..., 1] = scaling.y(raw[..., 1])
    out[..., 2] = scaling.t_gt(raw[..., 2])
    out[..., 3] = scaling.u(raw[..., 3])
    return out


# ---------------------------------------------------------------- operating data

def operating_scenarios(hours: float, rng: np.random.Generator, run_length: float = 3600.0,
                        noise_sigma: float = 0.0, tag: str = "op"):
    """Fault-free runs with random load ramps, setpoint moves and steam-flow swings.

    Events arrive every 150-600 s.  Load ramps move the exhaust temperature
    at 0.05-0.2 degC/s anywhere in 530-580 degC; setpoint moves step r within
    515 +/- 1.2 degC; steam-flow swings ramp d2 within +/-5 % of nominal over a
    minute.  The narrow setpoint and steam bands keep every target reachable
    by the spray valve across the whole exhaust-temperature range.
    """
    from .scenario import ScenarioSpec

    n_runs = max(1, int(math.ceil(hours * 3600.0 / run_length)))
    specs = []
    for k in range(n_runs):
        t = 0.0
        tg = float(rng.uniform(530.0, 580.0))
        r, d2 = 515.0, 65.0
        tg_k, r_k, d2_k = [(0.0, tg)], [(0.0, r)], [(0.0, d2)]
        while True:
            t += float(rng.uniform(150.0, 600.0))
            if t >= run_length:
                break
            kind = rng.integers(3)
            if kind == 0:
                new = float(rng.uniform(530.0, 580.0))
                dur = abs(new - tg) / float(rng.uniform(0.05, 0.2))
                tg_k += [(t, tg), (t + dur, new)]
                tg = new
            elif kind == 1:
                new = 515.0 + float(rng.uniform(-1.2, 1.2))
                r_k += [(t, r), (t + 1.0, new)]
                r = new
            else:
                new = 65.0 * float(rng.uniform(0.95, 1.05))
                d2_k += [(t, d2), (t + 60.0, new)]
                d2 = new
        end = max(run_length, tg_k[-1][0], r_k[-1][0], d2_k[-1][0])
        tg_k.append((end, tg))
        r_k.append((end, r))
        d2_k.append((end, d2))
        specs.append(ScenarioSpec(
            name=f"{tag}{k:03d}", duration=run_length, setpoint=tuple(r_k), t_gt=tuple(tg_k),
            steam_flow=tuple(d2_k), noise_sigma=noise_sigma,
            seed=int(rng.integers(2 ** 31))))
    return specs


@dataclass
class Segment:
    """One fixed-length slice of an operating run plus its target gains."""

    scenario_id: str
    index: int
    fault_free: bool
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    e: np.ndarray
    u_prev: np.ndarray  # spray applied during the previous interval
    t_gt: np.ndarray
    d2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    t_gt_before: float  # exhaust temperature one interval before the segment
    target: GainVector | None = None
    ise_baseline: float = math.nan
    ise_target: float = math.nan
    split: str = ""

    def __len__(self) -> int:
        return len(self.t)

    def samples(self) -> np.ndarray:
        return np.column_stack([self.e, self.y, self.t_gt, self.u_prev])


def slice_segments(trace, spec, length: int, d2_series: np.ndarray) -> list[Segment]:
    t_gt_series = trace.t_gt
    u = trace.u
    out = []
    n = len(trace) // length
    for s in range(n):
        a, b = s * length, (s + 1) * length
        if a == 0:
            # the loop starts at equilibrium, so u_prev at k=0 is the applied u
            u_prev = np.concatenate([[u[0]], u[a:b - 1]])
            before = t_gt_series[0]
        else:
            u_prev = u[a - 1:b - 1]
            before = t_gt_series[a - 1]
        out.append(Segment(
            scenario_id=spec.name, index=s, fault_free=spec.fault_free,
            t=trace.t[a:b].copy(), r=trace.r[a:b].copy(), y=trace.y[a:b].copy(),
            e=trace.e[a:b].copy(), u_prev=u_prev.copy(), t_gt=t_gt_series[a:b].copy(),
            d2=d2_series[a:b].copy(), x1=trace.x1[a:b].copy(), x2=trace.x2[a:b].copy(),
            t_gt_before=float(before)))
    return out


def segment_ise(gains: GainVector, seg: Segment, cfg: LabConfig) -> float:
    """Integral of squared error when ``seg`` is replayed under fixed ``gains``.

    The replay starts from the recorded plant state with a controller state
    that reproduces the recorded spray, so only the gains differ from the
    operating run.
    """
    pc, c, cc = cfg.plant, cfg.plant.constants(), cfg.control
    state = PlantState(float(seg.x1[0]), float(seg.x2[0]))
    e0 = feedback_error(float(seg.r[0]), state.x1, cc)
    cstate = bumpless_state(gains, float(seg.u_prev[0]), float(seg.t_gt[0]), cc, e0)
    d4_prev = pc.dsh_inlet(seg.t_gt_before)
    ise = 0.0
    for k in range(len(seg)):
        r, t_gt, d2 = float(seg.r[k]), float(seg.t_gt[k]), float(seg.d2[k])
        err = r - state.x1
        ise += err * err
        d4 = pc.dsh_inlet(t_gt)
        d6, d4_prev = d4 - d4_prev, d4
        u, cstate = compute_control(gains, feedback_error(r, state.x1, cc), cstate, t_gt,
                                    1.0, cc)
        state = step(state, u, pc.frame(t_gt, d6, u, 0.0, d2), c, 0.0, 1.0)
    return ise


# 3 fixed Nelder-Mead starts, as corners of the unit cube over the gain box
NM_CORNERS = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (1.0, 0.0, 0.0))


@dataclass(frozen=True)
class TargetSearch:
    gains: GainVector | None  # None: no start converged, segment skipped
    ise: float
    ise_baseline: float
    evaluations: int
    degenerate: bool = False


def optimise_segment(seg: Segment, cfg: LabConfig) -> TargetSearch:
    """Nelder-Mead over the gain box (unit-cube coordinates), best of 3 corner starts.

    The objective carries a small pull toward the box center so gains the
    segment cannot identify (kff with a flat gas temperature, say) land on
    the center instead of wherever the simplex stalled.  The operating
    controller's own gains stay a candidate, so a target never tracks its
    segment worse than the baseline did.
    """
    box, lc = cfg.gain_box, cfg.lstm
    lo, width = box.lower, box.upper - box.lower
    count = [0]

    def to_gains(z):
        return GainVector(*(lo + width * np.clip(z, 0.0, 1.0)))

    def ise(z):
        count[0] += 1
        return segment_ise(to_gains(z), seg, cfg)

    base = segment_ise(cfg.control.baseline, seg, cfg)
    pull = lc.center_pull * max(base, lc.ise_tie)

    def objective(z):
        return ise(z) + pull * float(np.sum((np.clip(z, 0.0, 1.0) - 0.5) ** 2))

    # nothing left to improve (ISE >= 0): treat as a tie and take the box center
    center_ise = ise(np.full(3, 0.5))
    if center_ise <= lc.ise_tie:
        return TargetSearch(GainVector(*box.center), center_ise, base, count[0], degenerate=True)
    best_z, best_f, converged = None, math.inf, False
    for corner in NM_CORNERS:
        z0 = np.array(corner, dtype=float)
        inward = np.where(z0 > 0.5, -0.25, 0.25)
        simplex = np.vstack([z0] + [z0 + inward * np.eye(3)[i] for i in range(3)])
        res = minimize(objective, z0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * 3,
                       options={"maxiter": lc.nm_max_iter, "initial_simplex": simplex,
                                "xatol": 1e-3, "fatol": 1e-6 * max(base, 1e-9)})
        converged |= bool(res.success)
        if math.isfinite(res.fun) and res.fun < best_f:
            best_z, best_f = res.x, float(res.fun)
    if not converged or best_z is None:
        return TargetSearch(None, best_f, base, count[0])
    found = ise(best_z)
    if found > base:
        return TargetSearch(cfg.control.baseline, base, base, count[0])
    return TargetSearch(to_gains(best_z), found, base, count[0])


def split_labels(n: int, fractions=(0.70, 0.15, 0.15)) -> list[str]:
    """Deterministic train/val/test labels for ``n`` segments, in order."""
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    n_train = min(n_train, n)
    n_val = min(n_val, n - n_train)
    return ["train"] * n_train + ["val"] * n_val + ["test"] * (n - n_train - n_val)


@dataclass
class GainDataset:
    segments: list[Segment] = field(default_factory=list)
    skipped: int = 0

    def split(self, name: str) -> list[Segment]:
        return [s for s in self.segments if s.split == name]

    @property
    def fault_free(self) -> bool:
        return all(s.fault_free for s in self.segments)

    def windows(self, name: str, window: int, stride: int, scaling: InputScaling,
                box: GainBox) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)``: X is (n, window, 4) normalised, Y the box-scaled targets."""
        xs, ys = [], []
        for seg in self.split(name):
            samples = normalise_samples(seg.samples(), scaling)
            target = gains_to_raw(seg.target, box)
            for end in range(window, len(seg) + 1, stride):
                xs.append(samples[end - window:end])
                ys.append(target)
        if not xs:
            return np.zeros((0, window, N_FEATURES)), np.zeros((0, 3))
        return np.array(xs), np.array(ys)


def generate_dataset(specs, cfg: LabConfig, progress=None) -> GainDataset:
    """Run every spec under the baseline PI, slice, and attach target gains.

    Faulted specs are refused: the tuner's training data is fault-free by
    contract.  Segments whose search fails to converge from every start are
    dropped with a warning.
    """
    from .scenario import FixedGainScheduler, run_scenario

    segs: list[Segment] = []
    skipped = 0
    for spec in specs:
        if not spec.fault_free or spec.fault.leak_flow > 0:
            raise ValueError(f"scenario {spec.name} carries a fault; training data must be fault-free")
        trace = run_scenario(spec, FixedGainScheduler(fixed_pi_controller(cfg.control)), cfg)
        times = spec.times()
        d2 = (spec._interp(spec.steam_flow, times) if spec.steam_flow
              else np.full(len(times), cfg.plant.d2))
        for seg in slice_segments(trace, spec, cfg.lstm.segment_length, d2):
            found = optimise_segment(seg, cfg)
            if found.gains is None:
                skipped += 1
                log.warning("segment %s/%d: no Nelder-Mead start converged; skipped",
                            seg.scenario_id, seg.index)
                continue
            seg.target, seg.ise_target, seg.ise_baseline = found.gains, found.ise, found.ise_baseline
            segs.append(seg)
            if progress is not None:
                progress(seg, found)
    for seg, label in zip(segs, split_labels(len(segs), cfg.lstm.split)):
        seg.split = label
    return GainDataset(segs, skipped)


DATASET_COLUMNS = ("scenario_id", "fault_free", "segment", "split", "t", "r", "y", "e",
                   "u_prev", "t_gt", "d2", "x1", "x2", "t_gt_before", "kp_star", "ki_star",
                   "kff_star", "ise_baseline", "ise_star")


def write_dataset(ds: GainDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_COLUMNS)
        for s in ds.segments:
            head = [s.scenario_id, int(s.fault_free), s.index, s.split]
            tail = [repr(float(v)) for v in (s.t_gt_before, *s.target.as_tuple(),
                                             s.ise_baseline, s.ise_target)]
            for k in range(len(s)):
                body = [repr(float(a[k])) for a in (s.t, s.r, s.y, s.e, s.u_prev, s.t_gt,
                                                    s.d2, s.x1, s.x2)]
                w.writerow(head + body + tail)


def read_dataset(path) -> GainDataset:
    rows: dict[tuple[str, int], list[dict]] = {}
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != DATASET_COLUMNS:
            raise ValueError(f"{path}: unexpected dataset header")
        for row in rd:
            rows.setdefault((row["scenario_id"], int(row["segment"])), []).append(row)
    segs = []
    for (sid, idx), block in rows.items():
        col = {k: np.array([float(r[k]) for r in block])
               for k in ("t", "r", "y", "e", "u_prev", "t_gt", "d2", "x1", "x2")}
        first = block[0]
        segs.append(Segment(
            scenario_id=sid, index=idx, fault_free=bool(int(first["fault_free"])),
            t_gt_before=float(first["t_gt_before"]),
            target=GainVector(float(first["kp_star"]), float(first["ki_star"]),
                              float(first["kff_star"])),
            ise_baseline=float(first["ise_baseline"]), ise_target=float(first["ise_star"]),
            split=first["split"], **col))
    return GainDataset(segs)


# ---------------------------------------------------------------- network

def gains_to_raw(g: GainVector, box: GainBox) -> np.ndarray:
    return np.array(g.as_tuple()) / _output_scale(box)


def _output_scale(box: GainBox) -> np.ndarray:
    # zero raw output means zero gains; one raw unit spans the box's larger bound
    return np.maximum(np.abs(box.lower), np.abs(box.upper))


@dataclass
class LstmModel:
    """input -> LSTM -> dropout -> LSTM -> dropout -> dense(3, linear)."""

    l1: LstmCell
    l2: LstmCell
    head: MLP
    dropout: float = 0.2

    @property
    def params(self) -> list[np.ndarray]:
        return [*self.l1.params, *self.l2.params, *self.head.params]

    def set_params(self, new) -> None:
        self.l1.set_params(new[0:2])
        self.l2.set_params(new[2:4])
        self.head.set_params(new[4:6])

    def copy(self) -> "LstmModel":
        m = LstmModel(LstmCell(self.l1.W.copy(), self.l1.b.copy()),
                      LstmCell(self.l2.W.copy(), self.l2.b.copy()), self.head.copy(),
                      self.dropout)
        return m

    def save(self, path) -> None:
        names = ("l1_W", "l1_b", "l2_W", "l2_b", "head_W", "head_b")
        arrays = dict(zip(names, self.params))
        arrays["dropout"] = np.array([self.dropout])
        save_arrays(path, arrays)

    @classmethod
    def load(cls, path) -> "LstmModel":
        a = load_arrays(path)
        head = MLP([a["head_W"], a["head_b"]], ["linear"])
        return cls(LstmCell(a["l1_W"], a["l1_b"]), LstmCell(a["l2_W"], a["l2_b"]), head,
                   float(a["dropout"][0]))


def build_lstm(lc: LstmConfig, rng: np.random.Generator) -> LstmModel:
    h1, h2 = lc.hidden
    return LstmModel(init_lstm(N_FEATURES, h1, rng), init_lstm(h1, h2, rng),
                     init_mlp((h2, 3), rng), lc.dropout)


def _dropout_mask(shape, p: float, rng: np.random.Generator | None):
    if rng is None or p <= 0.0:
        return None
    return (rng.random(shape) >= p) / (1.0 - p)


def model_forward(model: LstmModel, X: np.ndarray, rng: np.random.Generator | None = None):
    """Raw (box-scaled) outputs for a batch of windows ``X`` (B, T, 4).

    With ``rng`` given, inverted dropout is active (training); without it the
    pass is deterministic.
    """
    xs = np.transpose(np.asarray(X, dtype=float), (1, 0, 2))
    _, t1 = lstm_forward(model.l1, xs)
    seq = t1.hs[1:]
    m1 = _dropout_mask(seq.shape, model.dropout, rng)
    if m1 is not None:
        seq = seq * m1
    h2, t2 = lstm_forward(model.l2, seq)
    m2 = _dropout_mask(h2.shape, model.dropout, rng)
    if m2 is not None:
        h2 = h2 * m2
    out, th = dense_forward(model.head, h2)
    return out, (t1, m1, t2, m2, th)


def model_loss_and_grads(model: LstmModel, X: np.ndarray, Y: np.ndarray,
                         rng: np.random.Generator | None = None):
    """Mean over the batch of the squared gain error, and its gradient (BPTT)."""
    out, (t1, m1, t2, m2, th) = model_forward(model, X, rng)
    diff = out - Y
    B = len(Y)
    loss = float((diff * diff).sum() / B)
    g_head, dh2 = dense_backward(model.head, th, 2.0 * diff / B, accumulate=False)
    if m2 is not None:
        dh2 = dh2 * m2
    g2, dseq = lstm_backward(model.l2, t2, dh2)
    if m1 is not None:
        dseq = dseq * m1
    g1, _ = lstm_backward(model.l1, t1, dseq)
    return loss, [*g1, *g2, *g_head]


def infer_gains(model: LstmModel, window: StateWindow | np.ndarray, box: GainBox) -> GainVector:
    """Deterministic forward pass (dropout off), scaled and clamped into the box."""
    X = window.matrix() if isinstance(window, StateWindow) else np.asarray(window, dtype=float)
    out, _ = model_forward(model, X[None])
    k = _output_scale(box) * out[0]
    return GainVector(*box.clamp(k))


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    model: LstmModel
    train_loss: list[float]
    val_loss: list[float]
    best_epoch: int
    stopped_early: bool


def evaluate(model: LstmModel, X: np.ndarray, Y: np.ndarray, batch: int = 256) -> float:
    if len(X) == 0:
        return math.nan
    total = 0.0
    for a in range(0, len(X), batch):
        out, _ = model_forward(model, X[a:a + batch])
        d = out - Y[a:a + batch]
        total += float((d * d).sum())
    return total / len(X)


def train(model: LstmModel, X: np.ndarray, Y: np.ndarray, Xv: np.ndarray, Yv: np.ndarray,
          lc: LstmConfig, rng: np.random.Generator, epochs: int | None = None,
          seed_label: str = "") -> TrainResult:
    """Adam on minibatches with early stopping on the validation loss.

    Returns the parameters of the best validation epoch.  A non-finite loss
    aborts with the seed label and epoch in the message.
    """
    if len(X) == 0:
        raise ValueError("empty training split")
    epochs = lc.max_epochs if epochs is None else epochs
    opt = AdamState.for_params(model.params, lc.lr)
    best = model.copy()
    best_val = evaluate(model, Xv, Yv)
    best_epoch, waited = 0, 0
    train_curve: list[float] = []
    val_curve: list[float] = []
    stopped = False
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(X))
        total = 0.0
        for a in range(0, len(X), lc.batch_size):
            idx = order[a:a + lc.batch_size]
            loss, grads = model_loss_and_grads(model, X[idx], Y[idx], rng)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch} ({seed_label})")
            new, opt = adam_step(model.params, grads, opt)
            model.set_params(new)
            total += loss * len(idx)
        train_curve.append(total / len(X))
        val = evaluate(model, Xv, Yv)
        val_curve.append(val)
        if not math.isfinite(train_curve[-1]):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch} ({seed_label})")
        if math.isnan(val) or val < best_val:
            best, best_val, best_epoch, waited = model.copy(), val, epoch, 0
        else:
            waited += 1
            if waited >= lc.patience:
                stopped = True
                break
    return TrainResult(best, train_curve, val_curve, best_epoch, stopped)


def fit_lstm(ds: GainDataset, cfg: LabConfig, finetune: GainDataset | None = None
             ) -> tuple[LstmModel, dict]:
    """Train on the fault-free dataset, then optionally fine-tune on noisy records."""
    lc, box, sc = cfg.lstm, cfg.gain_box, cfg.scaling
    if not ds.fault_free:
        raise ValueError("refusing to train on faulted segments")
    X, Y = ds.windows("train", lc.window, lc.window_stride, sc, box)
    Xv, Yv = ds.windows("val", lc.window, lc.window_stride, sc, box)
    Xt, Yt = ds.windows("test", lc.window, lc.window_stride, sc, box)
    model = build_lstm(lc, rng_for(cfg.seed, "lstm_init"))
    rng = rng_for(cfg.seed, "lstm_train")
    initial_val = evaluate(model, Xv, Yv)
    res = train(model, X, Y, Xv, Yv, lc, rng, seed_label=f"seed {cfg.seed}")
    report = {"initial_val_loss": initial_val, "train_loss": res.train_loss, "val_loss": res.val_loss,
              "best_epoch": res.best_epoch, "stopped_early": res.stopped_early,
              "test_loss": evaluate(res.model, Xt, Yt), "n_train": len(X), "n_val": len(Xv),
              "n_test": len(Xt)}
    model = res.model
    if finetune is not None and finetune.segments:
        if not finetune.fault_free:
            raise ValueError("refusing to fine-tune on faulted segments")
        Xf, Yf = finetune.windows("train", lc.window, lc.window_stride, sc, box)
        Xfv, Yfv = finetune.windows("val", lc.window, lc.window_stride, sc, box)
        ft = train(model, Xf, Yf, Xfv, Yfv, lc, rng_for(cfg.seed, "finetune"),
                   epochs=lc.finetune_epochs, seed_label=f"seed {cfg.seed} fine-tune")
        model = ft.model
        report.update(finetune_train_loss=ft.train_loss, finetune_val_loss=ft.val_loss,
                      test_loss_after_finetune=evaluate(model, Xt, Yt))
    return model, report


# ---------------------------------------------------------------- in the loop

class LstmScheduler:
    """Stateless-between-steps inference over a sliding window; baseline while warming up."""

    name = "lstm"

    def __init__(self, model: LstmModel, cfg: LabConfig):
        self.model = model
        self.cfg = cfg
        self.window = StateWindow(cfg.lstm.window, cfg.scaling)

    def reset(self) -> None:
        self.window.clear()

    def gains(self, obs) -> GainVector:
        self.window.push(obs.e, obs.y, obs.t_gt, obs.u_prev)
        if not self.window.full:
            return self.cfg.control.baseline
        return infer_gains(self.model, self.window, self.cfg.gain_box)

    def after_step(self, ctx) -> None:
        return None
