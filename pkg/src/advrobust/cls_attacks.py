"""FGSM, DeepFool and saliency-map attacks on classifiers.

All attacks keep ``x_adv`` inside the unit box and report
``perturbation = x_adv - x`` computed after the final clip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import diffnet
from .diffnet import LossSpec, Network
from .metrics import mse, ssim, ssim_defined


class AttackError(ValueError):
    pass


@dataclass
class AttackResult:
    x_adv: np.ndarray
    perturbation: np.ndarray
    success: bool
    iterations: int
    grad_calls: int
    mse: float
    ssim: float | None
    linf: float
    info: dict[str, Any] = field(default_factory=dict)


def make_result(x, x_adv, success, iterations, grad_calls, **info) -> AttackResult:
    x = np.asarray(x, dtype=np.float64)
    x_adv = np.clip(np.asarray(x_adv, dtype=np.float64), 0.0, 1.0)
    r = x_adv - x
    return AttackResult(
        x_adv=x_adv,
        perturbation=r,
        success=bool(success),
        iterations=int(iterations),
        grad_calls=int(grad_calls),
        mse=mse(x, x_adv),
        ssim=ssim(x, x_adv) if ssim_defined(x.shape) else None,
        linf=float(np.abs(r).max()) if r.size else 0.0,
        info=info,
    )


def label(model: Network, x) -> int:
    return int(np.argmax(diffnet.forward(model, x)))


@dataclass(frozen=True)
class FgsmConfig:
    epsilon: float = 0.03
    loss: LossSpec = LossSpec()

    def __post_init__(self):
        if self.epsilon < 0:
            raise AttackError("FGSM epsilon must be >= 0")


@dataclass(frozen=True)
class DeepFoolConfig:
    max_iter: int = 50
    overshoot: float = 0.02

    def __post_init__(self):
        if self.overshoot < 0 or self.max_iter < 1:
            raise AttackError("DeepFool needs overshoot >= 0 and max_iter >= 1")


@dataclass(frozen=True)
class SmaConfig:
    target: int | None = None  # None: class with the second-highest clean logit
    theta: float = 0.2
    max_fraction: float = 0.10
    pairs: bool = False
    # when set, reaching the target only stops the attack once SSIM(x, x_adv) <= stop_ssim
    stop_ssim: float | None = None

    def __post_init__(self):
        if not 0 < self.max_fraction <= 1:
            raise AttackError("SMA max_fraction must lie in (0, 1]")
        if self.theta <= 0:
            raise AttackError("SMA theta must be positive")


def _within_linf(x, x_adv, eps):
    # x + eps can round so that (x + eps) - x > eps; step back one ulp where it does
    x_adv = x_adv.copy()
    for _ in range(4):
        d = x_adv - x
        over = np.abs(d) > eps
        if not over.any():
            break
        x_adv[over] = np.nextafter(x_adv[over], x[over])
    return x_adv


def fgsm(model: Network, x, y: int, cfg: FgsmConfig) -> AttackResult:
    x = np.asarray(x, dtype=np.float64)
    g = diffnet.grad_input(model, x, y, cfg.loss)
    x_adv = _within_linf(x, np.clip(x + cfg.epsilon * np.sign(g), 0.0, 1.0), cfg.epsilon)
    return make_result(x, x_adv, label(model, x_adv) != int(y), 1, 1, epsilon=cfg.epsilon)


def fgsm_direction(model: Network, x, y: int, loss: LossSpec = LossSpec()) -> np.ndarray:
    """Sign of the loss gradient; ``fgsm`` at any epsilon is a clip along it."""
    return np.sign(diffnet.grad_input(model, np.asarray(x, dtype=np.float64), y, loss))


def deepfool(model: Network, x, cfg: DeepFoolConfig = DeepFoolConfig()) -> AttackResult:
    """L2 DeepFool with overshoot applied to the accumulated perturbation."""
    x = np.asarray(x, dtype=np.float64)
    C = model.n_classes
    z, J = diffnet.logit_jacobian(model, x)
    y0 = int(np.argmax(z))
    total = np.zeros_like(x)
    x_i = x
    steps = []
    it = 0
    calls = C
    while True:
        yi = int(np.argmax(z))
        if yi != y0 or it >= cfg.max_iter:
            break
        best, best_k = math.inf, -1
        for k in range(C):
            if k == yi:
                continue
            w = J[k] - J[yi]
            f = z[k] - z[yi]
            norm = np.linalg.norm(w)
            d = abs(f) / norm if norm > 0 else math.inf
            if d < best:  # strict: ties keep the lowest class index
                best, best_k = d, k
        if best_k < 0:
            raise AttackError("degenerate boundary: every logit difference has zero gradient")
        w = J[best_k] - J[yi]
        wn2 = float(np.sum(w * w))
        if wn2 < 1e-24:
            raise AttackError("degenerate boundary: ||w|| < 1e-12")
        r = (abs(z[best_k] - z[yi]) / wn2) * w
        steps.append(float(np.linalg.norm(r)))
        total = total + r
        it += 1
        x_i = np.clip(x + (1 + cfg.overshoot) * total, 0.0, 1.0)
        z, J = diffnet.logit_jacobian(model, x_i)
        calls += C
    x_adv = np.clip(x + (1 + cfg.overshoot) * total, 0.0, 1.0)
    return make_result(x, x_adv, label(model, x_adv) != y0, it, calls,
                       step_norms=steps, source_label=y0)


def saliency_map(J: np.ndarray, target: int) -> np.ndarray:
    """Increasing-feature saliency of every input element toward ``target``."""
    alpha = J[target]
    beta = J.sum(axis=0) - alpha
    return np.where((alpha < 0) | (beta > 0), 0.0, alpha * np.abs(beta))


def sma(model: Network, x, cfg: SmaConfig = SmaConfig()) -> AttackResult:
    """Greedy saliency-map attack that only increases pixel values."""
    x = np.asarray(x, dtype=np.float64)
    C = model.n_classes
    z, J = diffnet.logit_jacobian(model, x)
    t = cfg.target
    if t is None:
        t = int(np.argsort(z, kind="stable")[-2])
    if not 0 <= int(t) < C:
        raise AttackError(f"target class {t} out of range [0, {C})")
    t = int(t)
    N = x.size
    budget = math.ceil(cfg.max_fraction * N)
    cur = x.copy().reshape(-1)
    touched = np.zeros(N, dtype=bool)
    it, calls = 0, C
    reason = "budget"
    while True:
        if int(np.argmax(z)) == t and (
                cfg.stop_ssim is None or ssim(x, cur.reshape(x.shape)) <= cfg.stop_ssim):
            reason = "target"
            break
        if touched.sum() >= budget:
            break
        Jf = J.reshape(C, -1)
        open_ = cur < 1.0
        # once the budget is nearly spent only already-touched pixels stay eligible
        if touched.sum() + (2 if cfg.pairs else 1) > budget:
            open_ &= touched
        alpha = Jf[t]
        beta = Jf.sum(axis=0) - alpha
        if cfg.pairs:
            A = alpha[:, None] + alpha[None, :]
            Bt = beta[:, None] + beta[None, :]
            S = np.where((A > 0) & (Bt < 0), A * np.abs(Bt), 0.0)
            S[~open_, :] = 0.0
            S[:, ~open_] = 0.0
            np.fill_diagonal(S, 0.0)
            if not S.max() > 0:
                reason = "saliency"
                break
            p, q = np.unravel_index(int(np.argmax(S)), S.shape)
            chosen = [p, q]
        else:
            S = saliency_map(Jf, t)
            S[~open_] = 0.0
            if not S.max() > 0:
                reason = "saliency"
                break
            chosen = [int(np.argmax(S))]
        for i in chosen:
            cur[i] = min(cur[i] + cfg.theta, 1.0)
            touched[i] = True
        it += 1
        z, J = diffnet.logit_jacobian(model, cur.reshape(x.shape))
        calls += C
    x_adv = cur.reshape(x.shape)
    return make_result(x, x_adv, label(model, x_adv) == t, it, calls,
                       target=t, stop=reason, pixels_modified=int(touched.sum()))
