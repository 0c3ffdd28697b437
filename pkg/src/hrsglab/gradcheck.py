"""Central finite-difference checks for every hand-written gradient.

Each suite perturbs every scalar parameter by +/-eps and compares the
difference quotient with the analytic gradient.  An entry passes when
``|fd - analytic| <= max(rtol * max(|fd|, |analytic|), atol)``.

The network suites evaluate the perturbed losses with their own forward
passes over stacked weight copies (a leading perturbation axis), written
independently of the production layers and fast enough to cover every
entry of every tensor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import LabConfig
from .control import ControllerState, feedback_error
from .nn import MLP, dense_backward, dense_forward, init_mlp

EPS = 1e-5
RTOL = 1e-6
ATOL = 1e-8


@dataclass(frozen=True)
class ParamCheck:
    suite: str
    param: str
    size: int
    worst_abs: float
    worst_rel: float
    failures: int

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        flag = "ok  " if self.ok else "FAIL"
        return (f"{flag} {self.suite:<14}{self.param:<10} n={self.size:<6d} "
                f"max|err|={self.worst_abs:.3e} max rel={self.worst_rel:.3e}")


def _tally(suite, name, size, fd, analytic, rtol, atol) -> ParamCheck:
    err = np.abs(fd - analytic)
    scale = np.maximum(np.abs(fd), np.abs(analytic))
    rel = np.divide(err, scale, out=np.zeros_like(err), where=scale > 0)
    failures = int(np.count_nonzero(err > np.maximum(rtol * scale, atol)))
    return ParamCheck(suite, name, size, float(err.max(initial=0.0)),
                      float(rel.max(initial=0.0)), failures)


def check_params(suite: str, names, params, analytic, loss, eps: float = EPS,
                 rtol: float = RTOL, atol: float = ATOL) -> list[ParamCheck]:
    """Compare ``analytic`` with central differences of ``loss()`` over ``params``.

    ``params`` are perturbed in place and restored; ``loss`` must read them.
    """
    out = []
    for name, p, g in zip(names, params, analytic):
        flat = p.reshape(-1)
        fd = np.empty(flat.size)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = loss()
            flat[i] = keep - eps
            down = loss()
            flat[i] = keep
            fd[i] = (up - down) / (2.0 * eps)
        out.append(_tally(suite, name, flat.size, fd, np.asarray(g).reshape(-1), rtol, atol))
    return out


def _mlp_names(net: MLP) -> list[str]:
    return [f"{'W' if k % 2 == 0 else 'b'}{k // 2}" for k in range(len(net.params))]


def check_stacked(suite: str, names, params, analytic, stacked_loss, eps: float = EPS,
                  rtol: float = RTOL, atol: float = ATOL, chunk: int = 256
                  ) -> list[ParamCheck]:
    """Like ``check_params`` but ``stacked_loss(j, P)`` evaluates many perturbations at once.

    ``P`` holds copies of ``params[j]`` along a new leading axis; every other
    tensor keeps its base value.  Returns one loss per copy.
    """
    out = []
    for j, (name, p, g) in enumerate(zip(names, params, analytic)):
        flat = p.reshape(-1)
        fd = np.empty(flat.size)
        for lo in range(0, flat.size, chunk):
            idx = np.arange(lo, min(lo + chunk, flat.size))
            n = idx.size
            stack = np.repeat(flat[None, :], 2 * n, axis=0)
            stack[np.arange(n), idx] += eps
            stack[n + np.arange(n), idx] -= eps
            losses = stacked_loss(j, stack.reshape((2 * n,) + p.shape))
            fd[idx] = (losses[:n] - losses[n:]) / (2.0 * eps)
        out.append(_tally(suite, name, flat.size, fd, np.asarray(g).reshape(-1), rtol, atol))
    return out


def _add_bias(z, b):
    return z + (b[:, None, :] if b.ndim == 2 else b)


def _stacked_mlp(params, acts, x):
    """Dense forward where any tensor may carry a leading copy axis."""
    h = x
    for i, act in enumerate(acts):
        h = _add_bias(h @ params[2 * i], params[2 * i + 1])
        if act == "tanh":
            h = np.tanh(h)
    return h


def _stacked_lstm(W, b, seq):
    """Hidden sequence of one LSTM layer; ``seq`` is a list of (..., B, n_in)."""
    H = W.shape[-1] // 4
    n_in = W.shape[-2] - H
    Wx, Wh = W[..., :n_in, :], W[..., n_in:, :]
    h = c = 0.0
    hs = []
    for x in seq:
        z = _add_bias(x @ Wx + (h @ Wh if hs else 0.0), b)
        sg = 1.0 / (1.0 + np.exp(-z))
        i, f, o = sg[..., :H], sg[..., H:2 * H], sg[..., 3 * H:]
        c = f * c + i * np.tanh(z[..., 2 * H:3 * H])
        h = o * np.tanh(c)
        hs.append(h)
    return hs


def dense_suite(seed: int = 0, backward=dense_backward) -> list[ParamCheck]:
    """Plain MLP with a quadratic read-out; ``backward`` is swappable for negative controls."""
    rng = np.random.default_rng(seed)
    net = init_mlp((3, 7, 5, 2), rng)
    x = rng.normal(size=(4, 3))
    w = rng.normal(size=(4, 2))

    def loss():
        out, _ = dense_forward(net, x)
        return float(0.5 * ((out * w) ** 2).sum())

    out, tape = dense_forward(net, x)
    grads, _ = backward(net, tape, out * w * w, accumulate=False)
    return check_params("dense", _mlp_names(net), net.params, grads, loss)


def pinn_context(cfg: LabConfig, saturated: bool = False):
    """A fixed mid-transient step used by the PINN gradient suites."""
    from .pinn_tuner import StepContext
    from .plant import PlantState, steady_state_gain

    pc, cc = cfg.plant, cfg.control
    e, y, t_gt = 0.7, 514.3, 545.0
    u = 1.05
    frame = pc.frame(t_gt, 0.01, u, 0.0)
    integral = 20.0 if saturated else 5.0
    return StepContext(
        e=e, y=y, t_gt=t_gt, e_ctrl=feedback_error(515.0, y, cc),
        cstate=ControllerState(integral, u, u), u_applied=u, e_next=0.66,
        state_mid=PlantState(514.32, 513.85), rates=(-0.0021, -0.061), frame=frame,
        plant_gain=-steady_state_gain(u, frame, pc.constants()))


def pinn_suite(cfg: LabConfig | None = None, saturated: bool = False) -> list[ParamCheck]:
    """Full chain: loss -> u -> gains -> network output -> every network parameter."""
    from .config import rng_for
    from .pinn_tuner import build_pinn, loss_and_grads, loss_from_raw, pinn_inputs

    cfg = cfg or LabConfig()
    net = build_pinn(cfg.pinn, cfg.control.baseline, rng_for(cfg.seed, "pinn_init"))
    ctx = pinn_context(cfg, saturated)
    x = pinn_inputs(ctx.e, ctx.y, ctx.t_gt, cfg.scaling)[None, :]
    tail = (cfg.pinn.mu, cfg.plant.constants(), cfg.control, cfg.gain_box, cfg.pinn.output_scale)

    def stacked_loss(j, P):
        params = list(net.params)
        params[j] = P
        raw = _stacked_mlp(params, net.activations, x)[..., 0, :]
        raw = np.broadcast_to(raw, (len(P), raw.shape[-1]))
        return np.array([loss_from_raw(r, ctx, *tail).total for r in raw])

    _, grads = loss_and_grads(net, ctx, cfg.pinn.mu, cfg.plant.constants(), cfg.control,
                              cfg.scaling, cfg.gain_box, cfg.pinn.output_scale)
    suite = "pinn-saturated" if saturated else "pinn"
    return check_stacked(suite, _mlp_names(net), net.params, grads, stacked_loss)


def lstm_suite(cfg: LabConfig | None = None, batch: int = 2, steps: int = 4,
               with_dropout: bool = True) -> list[ParamCheck]:
    """Stacked LSTM + head, BPTT through a short window, fixed dropout masks."""
    from .config import rng_for
    from .lstm_tuner import _dropout_mask, build_lstm, model_loss_and_grads

    cfg = cfg or LabConfig()
    model = build_lstm(cfg.lstm, rng_for(cfg.seed, "lstm_init"))
    data = np.random.default_rng(cfg.seed)
    X = data.uniform(-1.0, 1.0, size=(batch, steps, 4))
    Y = data.uniform(-1.0, 1.0, size=(batch, 3))

    def masks():
        return np.random.default_rng(cfg.seed + 1) if with_dropout else None

    # the same masks model_forward draws, in the same order
    mrng = masks()
    m1 = _dropout_mask((steps, batch, model.l1.hidden), model.dropout, mrng)
    m2 = _dropout_mask((batch, model.l2.hidden), model.dropout, mrng)
    seq_in = list(np.transpose(X, (1, 0, 2)))

    def stacked_loss(j, P):
        params = list(model.params)
        params[j] = P
        W1, b1, W2, b2, Wh, bh = params
        seq = _stacked_lstm(W1, b1, seq_in)
        if m1 is not None:
            seq = [h * m for h, m in zip(seq, m1)]
        h2 = _stacked_lstm(W2, b2, seq)[-1]
        if m2 is not None:
            h2 = h2 * m2
        out = _add_bias(h2 @ Wh, bh)
        diff = np.broadcast_to(out - Y, (len(P), batch, 3))
        return (diff * diff).sum(axis=(1, 2)) / batch

    _, grads = model_loss_and_grads(model, X, Y, masks())
    names = ["l1.W", "l1.b", "l2.W", "l2.b", "head.W", "head.b"]
    return check_stacked("lstm", names, model.params, grads, stacked_loss)


def run_all(seed: int | None = None) -> list[ParamCheck]:
    cfg = LabConfig() if seed is None else LabConfig(seed=seed)
    return [*dense_suite(cfg.seed), *pinn_suite(cfg), *pinn_suite(cfg, saturated=True),
            *lstm_suite(cfg)]
