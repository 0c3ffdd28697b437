"""Online physics-informed gain tuner.

A tanh MLP maps the current ``[e, y, t_gt]`` to ``(kp, ki, kff)``.  After
each control interval the network takes one plain gradient step on

    L_total = 1/2 e_next^2 + mu * 1/2 |rates_measured - rates_model(u)|^2

where the gradient is carried through the PI+FF law: loss -> u -> gains ->
network parameters.  The tracking term reaches ``u`` through the plant's
steady-state gain; the physics term compares finite-difference state rates
with the nominal (leak-free) model evaluated at the commanded, unsaturated
spray.  A leak the controller cannot see therefore shows up as a persistent
residual.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import GainBox, InputScaling, LabConfig, PinnConfig, rng_for
from .control import ControlConfig, ControllerState, GainVector, feedforward_regressor
from .nn import MLP, dense_backward, dense_forward, gd_step, init_mlp, save_arrays
from .plant import DisturbanceFrame, PlantConstants, PlantState, plant_derivatives

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PinnLossBreakdown:
    data_loss: float
    physics_loss: float
    total: float
    mu: float

    @property
    def weighted_physics(self) -> float:
        return self.mu * self.physics_loss


def data_loss(e: float) -> float:
    return 0.5 * e * e


def physics_loss(measured: tuple[float, float], model: tuple[float, float]) -> float:
    r1 = measured[0] - model[0]
    r2 = measured[1] - model[1]
    return 0.5 * (r1 * r1 + r2 * r2)


def pinn_inputs(e: float, y: float, t_gt: float, scaling: InputScaling) -> np.ndarray:
    return np.array([scaling.e(e), scaling.y(y), scaling.t_gt(t_gt)])


def build_pinn(cfg: PinnConfig, baseline: GainVector, rng: np.random.Generator) -> MLP:
    """3 -> hidden... -> 3 tanh MLP whose initial output is the baseline triple.

    Hidden weights start at ``init_scale`` of the fan-in range and the head
    bias holds the baseline gains, so the first gains differ from the
    baseline only by a small random perturbation.
    """
    net = init_mlp((3, *cfg.hidden, 3), rng, scale=cfg.init_scale)
    net.params[-1][:] = np.array(baseline.as_tuple()) / np.asarray(cfg.output_scale)
    return net


def pinn_forward(net: MLP, e: float, y: float, t_gt: float, scaling: InputScaling,
                 box: GainBox, output_scale=(1.0, 1.0, 1.0)) -> GainVector:
    raw, _ = dense_forward(net, pinn_inputs(e, y, t_gt, scaling))
    return GainVector(*box.clamp(np.asarray(output_scale) * raw))


@dataclass(frozen=True)
class StepContext:
    """Everything the update needs about one finished control interval."""

    e: float  # tracking error r - y the gains were computed from
    y: float
    t_gt: float
    e_ctrl: float  # controller-facing error fed to the law
    cstate: ControllerState  # controller state before the interval
    u_applied: float
    e_next: float  # tracking error after the plant step
    state_mid: PlantState  # midpoint of the measured states over the interval
    rates: tuple[float, float]  # measured d/dt of (x1, x2)
    frame: DisturbanceFrame  # controller-side frame (no knowledge of the leak)
    plant_gain: float  # -dy/du > 0, tracking-error sensitivity to spray


def _model_rates(ctx: StepContext, u: float, c: PlantConstants) -> tuple[float, float]:
    d = ctx.frame.with_outlet_flow(u)
    return plant_derivatives(ctx.state_mid, u, d, c, 0.0)


def _loss_terms(raw: np.ndarray, ctx: StepContext, mu: float, c: PlantConstants,
                ccfg: ControlConfig, box: GainBox, output_scale):
    scale = np.asarray(output_scale)
    k_pre = scale * raw
    k = box.clamp(k_pre)
    regress = np.array([ctx.e_ctrl, ccfg.integral_scale * ctx.cstate.integral,
                        feedforward_regressor(ctx.t_gt, ccfg)])
    u_unsat = float(k @ regress)
    u_sat = min(max(u_unsat, ccfg.u_min), ccfg.u_max)
    e_hat = ctx.e_next + ctx.plant_gain * (u_sat - ctx.u_applied)
    l_data = data_loss(e_hat)
    f1, f2 = _model_rates(ctx, u_unsat, c)
    r1, r2 = ctx.rates[0] - f1, ctx.rates[1] - f2
    l_phys = 0.5 * (r1 * r1 + r2 * r2)
    breakdown = PinnLossBreakdown(l_data, l_phys, l_data + mu * l_phys, mu)
    return breakdown, (k_pre, regress, u_unsat, e_hat, r1, r2)


def loss_from_raw(raw: np.ndarray, ctx: StepContext, mu: float, c: PlantConstants,
                  ccfg: ControlConfig, box: GainBox, output_scale=(1.0, 1.0, 1.0)
                  ) -> PinnLossBreakdown:
    """Composite loss given the network's raw output (no gradient)."""
    return _loss_terms(np.asarray(raw, dtype=float), ctx, mu, c, ccfg, box, output_scale)[0]


def loss_and_grads(net: MLP, ctx: StepContext, mu: float, c: PlantConstants,
                   ccfg: ControlConfig, scaling: InputScaling, box: GainBox,
                   output_scale=(1.0, 1.0, 1.0)
                   ) -> tuple[PinnLossBreakdown, list[np.ndarray]]:
    """Composite loss at the current parameters and its exact parameter gradient."""
    scale = np.asarray(output_scale)
    raw, tape = dense_forward(net, pinn_inputs(ctx.e, ctx.y, ctx.t_gt, scaling))
    breakdown, (k_pre, regress, u_unsat, e_hat, r1, r2) = _loss_terms(
        raw, ctx, mu, c, ccfg, box, output_scale)
    inside = (k_pre >= box.lower) & (k_pre <= box.upper)
    saturated = not (ccfg.u_min < u_unsat < ccfg.u_max)

    # model rates w.r.t. u: f1 through d7 = d2 + u, f2 directly
    x1, x2 = ctx.state_mid.x1, ctx.state_mid.x2
    df1_du = c.k2 * (x2 - x1)
    df2_du = c.k3 * (ctx.frame.d5 - x2)
    dl_du = -mu * (r1 * df1_du + r2 * df2_du)
    if not saturated:
        dl_du += e_hat * ctx.plant_gain
    dl_draw = dl_du * regress * inside * scale
    grads, _ = dense_backward(net, tape, dl_draw, accumulate=False)
    return breakdown, grads


class PinnTuner:
    """Stateful wrapper: one network, updated in place once per control interval."""

    name = "pinn"

    def __init__(self, cfg: LabConfig, net: MLP | None = None):
        self.cfg = cfg
        self.net = net if net is not None else build_pinn(
            cfg.pinn, cfg.control.baseline, rng_for(cfg.seed, "pinn_init"))
        self.mu = cfg.pinn.mu
        self.lr = cfg.pinn.lr
        self.skipped = 0
        self._rate_hist: deque = deque(maxlen=3)

    def reset(self) -> None:
        self._rate_hist.clear()

    def gains(self, obs) -> GainVector:
        return pinn_forward(self.net, obs.e, obs.y, obs.t_gt, self.cfg.scaling,
                            self.cfg.gain_box, self.cfg.pinn.output_scale)

    def after_step(self, ctx: StepContext) -> PinnLossBreakdown:
        return self.online_update(ctx)

    def smooth_rates(self, rates: tuple[float, float]) -> tuple[float, float]:
        self._rate_hist.append(rates)
        if not self.cfg.pinn.rate_smoothing:
            return rates
        arr = np.array(self._rate_hist)
        return float(arr[:, 0].mean()), float(arr[:, 1].mean())

    def online_update(self, ctx: StepContext) -> PinnLossBreakdown:
        c = self.cfg.plant.constants()
        breakdown, grads = loss_and_grads(self.net, ctx, self.mu, c, self.cfg.control,
                                          self.cfg.scaling, self.cfg.gain_box,
                                          self.cfg.pinn.output_scale)
        finite = math.isfinite(breakdown.total) and all(np.isfinite(g).all() for g in grads)
        if not finite:
            self.skipped += 1
            log.warning("non-finite PINN loss %r; update skipped", breakdown.total)
            return breakdown
        new = gd_step(self.net.params, grads, self.lr)
        if not all(np.isfinite(p).all() for p in new):
            self.skipped += 1
            log.warning("PINN update produced non-finite parameters; kept previous")
            return breakdown
        self.net.set_params(new)
        return breakdown

    def param_norm(self) -> float:
        return float(math.sqrt(sum(float((p * p).sum()) for p in self.net.params)))

    def save(self, path) -> None:
        names = [f"{'W' if k % 2 == 0 else 'b'}{k // 2}" for k in range(len(self.net.params))]
        save_arrays(path, dict(zip(names, self.net.params)))
