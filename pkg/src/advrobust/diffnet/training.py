from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .losses import LossSpec
from .network import Network


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


@dataclass
class TrainConfig:
    optimizer: str = "sgd"  # "sgd" (with momentum) or "adam"
    lr: float = 0.01
    momentum: float = 0.9
    lr_decay: float = 0.95
    epochs: int = 20
    batch_size: int = 16
    class_weights: Sequence[float] | None = None
    dice_weight: float = 0.0
    weight_decay: float = 0.0
    augment: bool = True
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= self.dice_weight <= 1.0:
            raise ValueError("dice_weight must lie in [0, 1]")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["class_weights"] is not None:
            d["class_weights"] = [float(w) for w in d["class_weights"]]
        return d

    @property
    def loss_spec(self) -> LossSpec:
        return LossSpec(self.class_weights, self.dice_weight)


def _flip(xb, yb, rng, segmentation):
    """Random horizontal/vertical flips per sample (images only)."""
    if xb.ndim != 4:
        return xb, yb
    xb, yb = xb.copy(), yb.copy()
    for axis in (1, 2):
        sel = rng.random(len(xb)) < 0.5
        xb[sel] = np.flip(xb[sel], axis=axis)
        if segmentation:
            yb[sel] = np.flip(yb[sel], axis=axis)
    return xb, yb


@dataclass
class _Optimizer:
    cfg: TrainConfig
    state: dict = field(default_factory=dict)
    t: int = 0

    def step(self, params, grads, lr):
        cfg = self.cfg
        self.t += 1
        for k, g in grads.items():
            if cfg.weight_decay and k.endswith(".W"):
                g = g + cfg.weight_decay * params[k]
            if cfg.optimizer == "sgd":
                v = self.state.get(k)
                v = -lr * g if v is None else cfg.momentum * v - lr * g
                self.state[k] = v
                params[k] = params[k] + v
            else:
                m, s = self.state.get(k, (np.zeros_like(g), np.zeros_like(g)))
                m = cfg.beta1 * m + (1 - cfg.beta1) * g
                s = cfg.beta2 * s + (1 - cfg.beta2) * g * g
                self.state[k] = (m, s)
                mh = m / (1 - cfg.beta1**self.t)
                sh = s / (1 - cfg.beta2**self.t)
                params[k] = params[k] - lr * mh / (np.sqrt(sh) + cfg.adam_eps)


def train(model: Network, images: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> Network:
    """Train a copy of ``model``; the per-epoch mean loss lands in ``.history``.

    Bit-reproducible for a fixed ``cfg.seed``. Raises :class:`TrainingDiverged`
    when an epoch loss is not finite.
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if len(images) == 0:
        raise ValueError("empty training set")
    if len(images) != len(labels):
        raise ValueError("images and labels differ in length")
    net = model.copy()
    net.history = []
    rng = np.random.default_rng(cfg.seed)
    loss_fn = cfg.loss_spec
    opt = _Optimizer(cfg)
    seg = net.task == "segmentation"
    n = len(images)
    for epoch in range(cfg.epochs):
        lr = cfg.lr * cfg.lr_decay**epoch
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s : s + cfg.batch_size]
            xb, yb = images[idx], labels[idx]
            if cfg.augment:
                xb, yb = _flip(xb, yb, rng, seg)
            z, caches = net.forward_batch(xb, keep=True)
            loss, dz = loss_fn(z, yb)
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, loss)
            _, grads = net.backward(caches, dz)
            opt.step(net.params, grads, lr)
            total += loss * len(idx)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(epoch, epoch_loss)
        net.history.append(epoch_loss)
    return net
