from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import ShapeError


def _check(params, grads):
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise ShapeError("parameter and gradient shapes differ")


@dataclass(frozen=True)
class AdamState:
    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, lr: float = 1e-3, **kw) -> "AdamState":
        zeros = tuple(np.zeros_like(p) for p in params)
        return cls(zeros, tuple(z.copy() for z in zeros), 0, lr, **kw)


def adam_step(params, grads, state: AdamState) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; inputs are left untouched."""
    _check(params, grads)
    if len(state.m) != len(params) or any(m.shape != p.shape for m, p in zip(state.m, params)):
        raise ShapeError("optimizer moments do not mirror the parameters")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        new_p.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_p, AdamState(tuple(new_m), tuple(new_v), t, state.lr, b1, b2, state.eps)


def gd_step(params, grads, lr: float) -> list[np.ndarray]:
    """Plain gradient descent: theta - lr * grad."""
    _check(params, grads)
    return [p - lr * g for p, g in zip(params, grads)]
