"""Small deterministic float64 network core.

Single-sample helpers (``forward``, ``grad_input``, ``grad_logit_input``,
``embed``) wrap the batched :class:`Network` methods.
"""

from __future__ import annotations

import numpy as np

from .layers import (
    Conv2d,
    Dense,
    Flatten,
    GlobalAvgPool,
    Layer,
    MaxPool2,
    ReLU,
    ShapeError,
    SkipConcat,
    Upsample2,
)
from .losses import LossSpec, log_softmax, soft_dice, softmax, weighted_xent
from .network import Network
from .training import TrainConfig, TrainingDiverged, train

__all__ = [
    "Conv2d", "Dense", "Flatten", "GlobalAvgPool", "Layer", "MaxPool2", "ReLU",
    "ShapeError", "SkipConcat", "Upsample2", "LossSpec", "log_softmax", "soft_dice",
    "softmax", "weighted_xent", "Network", "TrainConfig", "TrainingDiverged", "train",
    "forward", "grad_input", "grad_logit_input", "logit_jacobian", "embed",
    "loss_weighted_xent", "loss_dice",
]

loss_weighted_xent = weighted_xent
loss_dice = soft_dice


def forward(model: Network, x) -> np.ndarray:
    """Logits for one sample."""
    x = np.asarray(x, dtype=np.float64)
    return model.forward_batch(x[None])[0]


def grad_input(model: Network, x, y, loss_spec: LossSpec | None = None) -> np.ndarray:
    """Gradient of the scalar loss ``loss_spec(model(x), y)`` with respect to ``x``."""
    loss_spec = loss_spec or LossSpec()
    x = np.asarray(x, dtype=np.float64)
    z, caches = model.forward_batch(x[None], keep=True)
    _, dz = loss_spec(z, np.asarray(y)[None])
    gx, _ = model.backward(caches, dz, param_grads=False)
    return gx[0]


def grad_logit_input(model: Network, x, c: int, t=None) -> np.ndarray:
    """Gradient of logit ``c`` (at pixel ``t = (row, col)`` for segmentation)."""
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= int(c) < model.n_classes:
        raise ValueError(f"class {c} out of range [0, {model.n_classes})")
    z, caches = model.forward_batch(x[None], keep=True)
    dz = np.zeros_like(z)
    if model.task == "segmentation":
        if t is None:
            raise ValueError("segmentation logits need a pixel t")
        i, j = (int(v) for v in t)
        H, W = z.shape[1:3]
        if not (0 <= i < H and 0 <= j < W):
            raise ValueError(f"pixel {t} outside {H}x{W} map")
        dz[0, i, j, c] = 1.0
    else:
        if t is not None:
            raise ValueError("classification logits take no pixel")
        dz[0, c] = 1.0
    gx, _ = model.backward(caches, dz, param_grads=False)
    return gx[0]


def logit_jacobian(model: Network, x) -> tuple[np.ndarray, np.ndarray]:
    """Logits and the full Jacobian ``d z_c / d x`` of a classifier.

    Returns ``(z, J)`` with ``J.shape == (C,) + x.shape``, computed with one
    batched backward pass (row ``c`` seeds logit ``c``).
    """
    if model.task != "classification":
        raise ValueError("logit_jacobian needs a classification head")
    x = np.asarray(x, dtype=np.float64)
    C = model.n_classes
    xb = np.broadcast_to(x, (C,) + x.shape).copy()
    z, caches = model.forward_batch(xb, keep=True)
    J, _ = model.backward(caches, np.eye(C), param_grads=False)
    return z[0], J


def embed(model: Network, x) -> np.ndarray:
    """Flattened activation feeding the final layer."""
    if len(model.layers) < 2:
        raise ValueError("embedding needs a model with at least 2 layers")
    x = np.asarray(x, dtype=np.float64)
    return model.forward_batch(x[None], upto=len(model.layers) - 1)[0].reshape(-1)
