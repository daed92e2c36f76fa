"""Losses on logits, each returning ``(value, d value / d logits)``.

Logits carry classes on the last axis; every other axis is a sample or a
pixel and is averaged over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DICE_SMOOTH = 1e-6


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    s = z - z.max(axis=-1, keepdims=True)
    return s - np.log(np.exp(s).sum(axis=-1, keepdims=True))


def _check_labels(y, n_classes):
    y = np.asarray(y)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"class index out of range [0, {n_classes})")
    return y.astype(np.int64)


def weighted_xent(z, y, weights=None):
    """Mean of ``w[y] * -log softmax(z)[y]`` over samples/pixels."""
    z = np.asarray(z, dtype=np.float64)
    C = z.shape[-1]
    y = _check_labels(y, C)
    if y.shape != z.shape[:-1]:
        raise ValueError(f"labels {y.shape} do not match logits {z.shape}")
    w = np.ones(C) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (C,):
        raise ValueError(f"need {C} class weights, got {w.shape}")
    zf = z.reshape(-1, C)
    yf = y.reshape(-1)
    n = len(yf)
    lsm = log_softmax(zf)
    wy = w[yf]
    loss = float(-(wy * lsm[np.arange(n), yf]).sum() / n)
    g = np.exp(lsm)
    g[np.arange(n), yf] -= 1.0
    g *= (wy / n)[:, None]
    return loss, g.reshape(z.shape)


def soft_dice(z, y):
    """``1 - mean_c dice_c`` of softmax probabilities against one-hot ``y``.

    Pixels of the whole batch are pooled per class.
    """
    z = np.asarray(z, dtype=np.float64)
    C = z.shape[-1]
    y = _check_labels(y, C)
    if y.shape != z.shape[:-1]:
        raise ValueError(f"labels {y.shape} do not match logits {z.shape}")
    p = softmax(z).reshape(-1, C)
    t = np.eye(C)[y.reshape(-1)]
    inter = (p * t).sum(axis=0)
    num = 2.0 * inter + DICE_SMOOTH
    den = p.sum(axis=0) + t.sum(axis=0) + DICE_SMOOTH
    loss = float(1.0 - (num / den).mean())
    dp = -((2.0 * t * den - num) / den**2) / C
    dz = p * (dp - (p * dp).sum(axis=1, keepdims=True))
    return loss, dz.reshape(z.shape)


@dataclass(frozen=True)
class LossSpec:
    """``dice_weight * dice + (1 - dice_weight) * weighted xent``."""

    class_weights: Sequence[float] | None = None
    dice_weight: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.dice_weight <= 1.0:
            raise ValueError("dice_weight must lie in [0, 1]")

    def __call__(self, z, y):
        lam = self.dice_weight
        loss, g = weighted_xent(z, y, self.class_weights)
        if lam == 0.0:
            return loss, g
        dl, dg = soft_dice(z, y)
        return lam * dl + (1 - lam) * loss, lam * dg + (1 - lam) * g
