"""LSTM cells with explicit per-step tapes and backpropagation through time.

Gate layout along the last axis of ``W``/``b`` is ``[input, forget, cell, output]``.
Sequences are time-major: ``(T, batch, features)``; a 2-D ``(T, features)``
sequence is treated as a batch of one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import ShapeError, StaleTapeError


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LstmCell:
    W: np.ndarray  # (n_in + hidden, 4 * hidden)
    b: np.ndarray  # (4 * hidden,)
    version: int = 0

    def __post_init__(self):
        h4 = self.W.shape[1]
        if h4 % 4 or self.b.shape != (h4,) or self.W.shape[0] <= h4 // 4:
            raise ShapeError(f"bad LSTM shapes W {self.W.shape} b {self.b.shape}")

    @property
    def hidden(self) -> int:
        return self.W.shape[1] // 4

    @property
    def n_in(self) -> int:
        return self.W.shape[0] - self.hidden

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W, self.b]

    def set_params(self, new) -> None:
        W, b = new
        if W.shape != self.W.shape or b.shape != self.b.shape:
            raise ShapeError("parameter shapes changed")
        self.W, self.b = np.array(W, dtype=float), np.array(b, dtype=float)
        self.version += 1

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        k = "ifgo".index(name[0])
        sl = slice(k * self.hidden, (k + 1) * self.hidden)
        return self.W[:, sl], self.b[sl]


def init_lstm(n_in: int, hidden: int, rng: np.random.Generator,
              forget_bias: float = 1.0) -> LstmCell:
    lim = 1.0 / np.sqrt(n_in + hidden)
    W = rng.uniform(-lim, lim, size=(n_in + hidden, 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = forget_bias
    return LstmCell(W, b)


@dataclass
class LstmTape:
    xs: np.ndarray  # (T, B, n_in)
    hs: np.ndarray  # (T + 1, B, H), hs[0] is the initial state
    cs: np.ndarray  # (T + 1, B, H)
    gates: np.ndarray  # (T, B, 4H) post-nonlinearity
    squeeze: bool
    version: int


def lstm_forward(cell: LstmCell, sequence, h0=None, c0=None
                 ) -> tuple[np.ndarray, LstmTape]:
    """Run the recurrence left to right; returns the final hidden state and the tape.

    ``tape.hs[1:]`` is the full hidden sequence, which is what a stacked
    layer above consumes.
    """
    xs = np.asarray(sequence, dtype=float)
    if xs.ndim == 0 or xs.shape[0] == 0:
        raise ValueError("empty sequence")
    squeeze = xs.ndim == 2
    if squeeze:
        xs = xs[:, None, :]
    T, B, n_in = xs.shape
    if n_in != cell.n_in:
        raise ShapeError(f"sequence feature dim {n_in} != cell input {cell.n_in}")
    H = cell.hidden
    hs = np.zeros((T + 1, B, H))
    cs = np.zeros((T + 1, B, H))
    if h0 is not None:
        hs[0] = h0
    if c0 is not None:
        cs[0] = c0
    gates = np.empty((T, B, 4 * H))
    Wx, Wh = cell.W[:n_in], cell.W[n_in:]
    for t in range(T):
        z = xs[t] @ Wx + hs[t] @ Wh + cell.b
        g = gates[t]
        g[:, :2 * H] = sigmoid(z[:, :2 * H])
        g[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
        g[:, 3 * H:] = sigmoid(z[:, 3 * H:])
        i, f, gg, o = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
        cs[t + 1] = f * cs[t] + i * gg
        hs[t + 1] = o * np.tanh(cs[t + 1])
    h_last = hs[-1][0] if squeeze else hs[-1]
    return h_last, LstmTape(xs, hs, cs, gates, squeeze, cell.version)


def lstm_backward(cell: LstmCell, tape: LstmTape, dh
                  ) -> tuple[list[np.ndarray], np.ndarray]:
    """BPTT over the whole taped window.

    ``dh`` is either the gradient on the final hidden state ``(B, H)`` or on
    every hidden output ``(T, B, H)``.  Returns ``([dW, db], dxs)``.
    """
    if tape.version != cell.version:
        raise StaleTapeError("LSTM parameters changed after this forward pass")
    T, B, n_in = tape.xs.shape
    H = cell.hidden
    dh = np.asarray(dh, dtype=float)
    if tape.squeeze:
        dh = dh[..., None, :]
    if dh.shape == (B, H):
        dh_seq = np.zeros((T, B, H))
        dh_seq[-1] = dh
    elif dh.shape == (T, B, H):
        dh_seq = dh
    else:
        raise ShapeError(f"upstream shape {dh.shape} fits neither (B,H) nor (T,B,H)")
    Wx, Wh = cell.W[:n_in], cell.W[n_in:]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros_like(cell.b)
    dxs = np.empty_like(tape.xs)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    dz = np.empty((B, 4 * H))
    for t in reversed(range(T)):
        g = tape.gates[t]
        i, f, gg, o = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
        tc = np.tanh(tape.cs[t + 1])
        dh_t = dh_seq[t] + dh_next
        dc = dc_next + dh_t * o * (1.0 - tc ** 2)
        dz[:, :H] = dc * gg * i * (1.0 - i)
        dz[:, H:2 * H] = dc * tape.cs[t] * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dc * i * (1.0 - gg ** 2)
        dz[:, 3 * H:] = dh_t * tc * o * (1.0 - o)
        dWx += tape.xs[t].T @ dz
        dWh += tape.hs[t].T @ dz
        db += dz.sum(axis=0)
        dxs[t] = dz @ Wx.T
        dh_next = dz @ Wh.T
        dc_next = dc * f
    dW = np.vstack([dWx, dWh])
    if tape.squeeze:
        dxs = dxs[:, 0, :]
    return [dW, db], dxs
