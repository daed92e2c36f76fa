"""Layer primitives with hand-written reverse-mode rules.

Every layer works on a leading batch axis. Image tensors are channels-last,
``(B, H, W, C)``. ``forward`` returns ``(out, cache)`` and ``backward`` maps
an upstream gradient plus that cache to ``(grad_input, param_grads)``.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    pass


class Layer:
    kind = "layer"
    param_names: tuple[str, ...] = ()

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        return in_shape

    def init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        return {}

    def forward(self, x, params):
        raise NotImplementedError

    def backward(self, g, cache, params, need_params=True):
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.kind}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "type")
        return f"{self.kind}({args})"


class Dense(Layer):
    kind = "dense"
    param_names = ("W", "b")

    def __init__(self, n_in: int, n_out: int):
        self.n_in, self.n_out = int(n_in), int(n_out)

    def out_shape(self, in_shape):
        if in_shape != (self.n_in,):
            raise ShapeError(f"expects input ({self.n_in},), got {in_shape}")
        return (self.n_out,)

    def init_params(self, rng):
        std = np.sqrt(2.0 / self.n_in)
        return {
            "W": rng.standard_normal((self.n_in, self.n_out)) * std,
            "b": np.zeros(self.n_out),
        }

    def forward(self, x, params):
        return x @ params["W"] + params["b"], x

    def backward(self, g, cache, params, need_params=True):
        grads = {"W": cache.T @ g, "b": g.sum(axis=0)} if need_params else {}
        return g @ params["W"].T, grads

    def to_dict(self):
        return {"type": self.kind, "n_in": self.n_in, "n_out": self.n_out}


class Conv2d(Layer):
    """Square convolution, stride 1, zero padding that preserves H and W."""

    kind = "conv2d"
    param_names = ("W", "b")

    def __init__(self, c_in: int, c_out: int, kernel: int = 3):
        if kernel not in (1, 3):
            raise ValueError("only 1x1 and 3x3 kernels are supported")
        self.c_in, self.c_out, self.kernel = int(c_in), int(c_out), int(kernel)

    def out_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[2] != self.c_in:
            raise ShapeError(f"expects (H, W, {self.c_in}), got {in_shape}")
        return (in_shape[0], in_shape[1], self.c_out)

    def init_params(self, rng):
        k = self.kernel
        std = np.sqrt(2.0 / (k * k * self.c_in))
        return {
            "W": rng.standard_normal((k, k, self.c_in, self.c_out)) * std,
            "b": np.zeros(self.c_out),
        }

    def _cols(self, x):
        k = self.kernel
        B, H, W, C = x.shape
        if k == 1:
            return x.reshape(B * H * W, C)
        xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
        win = sliding_window_view(xp, (k, k), axis=(1, 2))  # B,H,W,C,k,k
        return win.transpose(0, 1, 2, 4, 5, 3).reshape(B * H * W, k * k * C)

    def forward(self, x, params):
        B, H, W, _ = x.shape
        cols = self._cols(x)
        Wm = params["W"].reshape(-1, self.c_out)
        out = cols @ Wm + params["b"]
        return out.reshape(B, H, W, self.c_out), (cols, x.shape)

    def backward(self, g, cache, params, need_params=True):
        cols, shape = cache
        W = params["W"]
        g2 = g.reshape(-1, self.c_out)
        grads = {}
        if need_params:
            grads = {"W": (cols.T @ g2).reshape(W.shape), "b": g2.sum(axis=0)}
        if self.kernel == 1:
            return (g2 @ W.reshape(-1, self.c_out).T).reshape(shape), grads
        # the input gradient is a same-padded convolution with the flipped kernel
        Wf = W[::-1, ::-1].transpose(0, 1, 3, 2).reshape(-1, self.c_in)
        gx = self._cols(g) @ Wf
        return gx.reshape(shape), grads

    def to_dict(self):
        return {"type": self.kind, "c_in": self.c_in, "c_out": self.c_out, "kernel": self.kernel}


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, params):
        mask = x > 0  # subgradient at 0 is 0
        return x * mask, mask

    def backward(self, g, cache, params, need_params=True):
        return g * cache, {}


class MaxPool2(Layer):
    kind = "maxpool"

    def out_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[0] % 2 or in_shape[1] % 2:
            raise ShapeError(f"needs (H, W, C) with even H, W; got {in_shape}")
        return (in_shape[0] // 2, in_shape[1] // 2, in_shape[2])

    def forward(self, x, params):
        B, H, W, C = x.shape
        blocks = x.reshape(B, H // 2, 2, W // 2, 2, C).transpose(0, 1, 3, 5, 2, 4)
        blocks = blocks.reshape(B, H // 2, W // 2, C, 4)
        idx = blocks.argmax(axis=-1)  # ties go to the first element
        out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
        return out, (idx, x.shape)

    def backward(self, g, cache, params, need_params=True):
        idx, (B, H, W, C) = cache
        onehot = np.zeros(idx.shape + (4,))
        np.put_along_axis(onehot, idx[..., None], 1.0, axis=-1)
        gb = onehot * g[..., None]
        gb = gb.reshape(B, H // 2, W // 2, C, 2, 2).transpose(0, 1, 4, 2, 5, 3)
        return gb.reshape(B, H, W, C), {}


class Upsample2(Layer):
    kind = "upsample"

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"needs (H, W, C), got {in_shape}")
        return (in_shape[0] * 2, in_shape[1] * 2, in_shape[2])

    def forward(self, x, params):
        return x.repeat(2, axis=1).repeat(2, axis=2), None

    def backward(self, g, cache, params, need_params=True):
        B, H2, W2, C = g.shape
        return g.reshape(B, H2 // 2, 2, W2 // 2, 2, C).sum(axis=(2, 4)), {}


class GlobalAvgPool(Layer):
    kind = "globalpool"

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"needs (H, W, C), got {in_shape}")
        return (in_shape[2],)

    def forward(self, x, params):
        return x.mean(axis=(1, 2)), x.shape

    def backward(self, g, cache, params, need_params=True):
        B, H, W, C = cache
        return np.broadcast_to(g[:, None, None, :] / (H * W), cache).copy(), {}


class Flatten(Layer):
    kind = "flatten"

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, params):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, g, cache, params, need_params=True):
        return g.reshape(cache), {}


class SkipConcat(Layer):
    """Concatenate the running activation with an earlier one on the last axis.

    ``source`` indexes the layer whose output is reused; ``-1`` is the network
    input. The network wires the extra operand in.
    """

    kind = "skip"

    def __init__(self, source: int):
        self.source = int(source)

    def concat_shape(self, in_shape, src_shape):
        if in_shape[:-1] != src_shape[:-1]:
            raise ShapeError(
                f"cannot concat {in_shape} with source {self.source} output {src_shape}"
            )
        return in_shape[:-1] + (in_shape[-1] + src_shape[-1],)

    def forward(self, x, params, skip=None):
        return np.concatenate([x, skip], axis=-1), x.shape[-1]

    def backward(self, g, cache, params, need_params=True):
        n = cache
        return (g[..., :n], g[..., n:]), {}

    def to_dict(self):
        return {"type": self.kind, "source": self.source}


LAYER_TYPES = {
    cls.kind: cls
    for cls in (Dense, Conv2d, ReLU, MaxPool2, Upsample2, GlobalAvgPool, Flatten, SkipConcat)
}


def layer_from_dict(d: dict[str, Any]) -> Layer:
    d = dict(d)
    kind = d.pop("type")
    try:
        cls = LAYER_TYPES[kind]
    except KeyError:
        raise ValueError(f"unknown layer type {kind!r}") from None
    return cls(**d)
