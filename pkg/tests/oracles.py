"""Independent reference implementations used as test oracles, plus small builders."""
import math

import numpy as np

from hrsglab.control import GainVector
from hrsglab.scenario import Trace, TraceRecord


def scalar_mlp(net, x):
    # oracle: one neuron at a time, no matrix products
    h = list(map(float, x))
    for i, act in enumerate(net.activations):
        W, b = net.params[2 * i], net.params[2 * i + 1]
        nxt = []
        for j in range(W.shape[1]):
            z = float(b[j])
            for k in range(W.shape[0]):
                z += h[k] * float(W[k, j])
            nxt.append(math.tanh(z) if act == "tanh" else z)
        h = nxt
    return np.array(h)


def scalar_lstm(cell, seq, c0=None):
    H, n_in = cell.hidden, cell.n_in
    h = [0.0] * H
    c = list(c0) if c0 is not None else [0.0] * H
    sig = lambda z: 1.0 / (1.0 + math.exp(-z))
    for x in seq:
        v = list(map(float, x)) + h
        z = [float(cell.b[j]) + sum(v[k] * float(cell.W[k, j]) for k in range(n_in + H))
             for j in range(4 * H)]
        c = [sig(z[H + j]) * c[j] + sig(z[j]) * math.tanh(z[2 * H + j]) for j in range(H)]
        h = [sig(z[3 * H + j]) * math.tanh(c[j]) for j in range(H)]
    return np.array(h), np.array(c)


def fd_grads(loss, params, eps=1e-5):
    out = []
    for p in params:
        g = np.zeros_like(p)
        flat, gf = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = loss()
            flat[i] = keep - eps
            down = loss()
            flat[i] = keep
            gf[i] = (up - down) / (2 * eps)
        out.append(g)
    return out


def make_trace(e, u=None, r=515.0):
    e = np.asarray(e, dtype=float)
    u = np.zeros(len(e)) if u is None else np.asarray(u, dtype=float)
    g = GainVector(1.2, 105.0, 0.0)
    return Trace([TraceRecord(float(k), r, r - e[k], float(e[k]), float(u[k]), g, 0.0, 530.0,
                              r - e[k], r) for k in range(len(e))], controller="x")


def euler(x1, x2, u, d, c, f, t_end, h=1e-3):
    # independent oracle: explicit Euler on a hand-copied right-hand side
    n = int(round(t_end / h))
    for _ in range(n):
        s = u + f
        g1 = c.k2 * (c.k1 * d.d1 + d.d7 * (x2 - x1) - d.d3)
        g2 = c.k3 * ((d.d2 + s) * (d.d4 - x2) - s * (d.d4 - d.d5) + d.m_in_dsh_bar * d.d6)
        x1, x2 = x1 + h * g1, x2 + h * g2
    return x1, x2
