"""Fully connected networks with hand-written reverse mode."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "linear")


class ShapeError(ValueError):
    pass


class StaleTapeError(RuntimeError):
    """A tape was replayed after the parameters it recorded were changed."""


@dataclass
class MLP:
    """Ordered (W, b) layers; ``grads`` mirrors ``params`` entry for entry.

    ``params`` is ``[W0, b0, W1, b1, ...]`` with ``W`` shaped (in, out).
    """

    params: list[np.ndarray]
    activations: list[str]
    grads: list[np.ndarray] = field(default_factory=list)
    version: int = 0

    def __post_init__(self):
        if len(self.params) != 2 * len(self.activations):
            raise ShapeError("need one (W, b) pair per activation")
        for i in range(len(self.activations)):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"layer {i}: W {w.shape} and b {b.shape} disagree")
            if i and w.shape[0] != self.params[2 * i - 2].shape[1]:
                raise ShapeError(f"layer {i} input {w.shape[0]} does not chain")
            if self.activations[i] not in ACTIVATIONS:
                raise ValueError(f"unknown activation {self.activations[i]!r}")
        if not self.grads:
            self.grads = [np.zeros_like(p) for p in self.params]

    @property
    def sizes(self) -> list[int]:
        return [self.params[0].shape[0]] + [self.params[2 * i].shape[1]
                                            for i in range(len(self.activations))]

    def zero_grad(self) -> None:
        for g in self.grads:
            g.fill(0.0)

    def set_params(self, new: list[np.ndarray]) -> None:
        if [p.shape for p in new] != [p.shape for p in self.params]:
            raise ShapeError("parameter shapes changed")
        self.params = [np.array(p, dtype=float) for p in new]
        self.version += 1

    def copy(self) -> "MLP":
        return MLP([p.copy() for p in self.params], list(self.activations))


def init_mlp(sizes, rng: np.random.Generator, hidden: str = "tanh",
             scale: float = 1.0) -> MLP:
    """Fan-in scaled uniform init; hidden layers use ``hidden``, the head is linear."""
    params, acts = [], []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        lim = scale / np.sqrt(n_in)
        params.append(rng.uniform(-lim, lim, size=(n_in, n_out)))
        params.append(np.zeros(n_out))
        acts.append("linear" if i == len(sizes) - 2 else hidden)
    return MLP(params, acts)


@dataclass
class DenseTape:
    inputs: list[np.ndarray]  # input to each layer (batch, in)
    outputs: list[np.ndarray]  # post-activation of each layer
    squeeze: bool
    version: int


def dense_forward(net: MLP, x) -> tuple[np.ndarray, DenseTape]:
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != net.params[0].shape[0]:
        raise ShapeError(f"input shape {x.shape} does not match layer 0 "
                         f"({net.params[0].shape[0]} inputs)")
    inputs, outputs = [], []
    for i, act in enumerate(net.activations):
        inputs.append(h)
        z = h @ net.params[2 * i] + net.params[2 * i + 1]
        h = np.tanh(z) if act == "tanh" else z
        outputs.append(h)
    out = h[0] if squeeze else h
    return out, DenseTape(inputs, outputs, squeeze, net.version)


def dense_backward(net: MLP, tape: DenseTape, upstream,
                   accumulate: bool = True) -> tuple[list[np.ndarray], np.ndarray]:
    """Gradients of ``sum(upstream * output)`` w.r.t. parameters and input.

    Parameter gradients are added into ``net.grads`` when ``accumulate`` is set,
    and also returned.
    """
    if tape.version != net.version:
        raise StaleTapeError("network parameters changed after this forward pass")
    g = np.asarray(upstream, dtype=float)
    if tape.squeeze:
        g = g[None, :]
    if g.shape != tape.outputs[-1].shape:
        raise ShapeError(f"upstream {g.shape} vs output {tape.outputs[-1].shape}")
    grads: list[np.ndarray] = [None] * len(net.params)  # type: ignore[list-item]
    for i in reversed(range(len(net.activations))):
        if net.activations[i] == "tanh":
            g = g * (1.0 - tape.outputs[i] ** 2)
        grads[2 * i] = tape.inputs[i].T @ g
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ net.params[2 * i].T
    if accumulate:
        for acc, gr in zip(net.grads, grads):
            acc += gr
    dx = g[0] if tape.squeeze else g
    return grads, dx
