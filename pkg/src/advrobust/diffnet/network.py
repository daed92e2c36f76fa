from __future__ import annotations

import copy
from typing import Sequence

import numpy as np

from .layers import Layer, ShapeError, SkipConcat, layer_from_dict

TASKS = ("classification", "segmentation")


class Network:
    """Layered network with skip-concat wiring.

    ``params`` maps ``"<layer index>.<name>"`` to an ndarray. Batched methods
    (``forward_batch``, ``backward``) take a leading batch axis; the module
    level helpers in :mod:`advrobust.diffnet` handle single samples.
    """

    def __init__(
        self,
        layers: Sequence[Layer],
        input_shape: Sequence[int],
        task: str,
        n_classes: int,
        params: dict[str, np.ndarray] | None = None,
        seed: int = 0,
    ):
        if task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        self.layers = list(layers)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.task = task
        self.n_classes = int(n_classes)
        self.seed = seed
        self.history: list[float] = []
        self.shapes = self._infer_shapes()
        if params is None:
            rng = np.random.default_rng(seed)
            params = {}
            for i, layer in enumerate(self.layers):
                for k, v in layer.init_params(rng).items():
                    params[f"{i}.{k}"] = v
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
        self._check_params()

    def _infer_shapes(self) -> list[tuple[int, ...]]:
        if not self.layers:
            raise ValueError("network has no layers")
        shapes = [self.input_shape]
        for i, layer in enumerate(self.layers):
            try:
                if isinstance(layer, SkipConcat):
                    if not -1 <= layer.source < i:
                        raise ShapeError(f"skip source {layer.source} must precede layer {i}")
                    shapes.append(layer.concat_shape(shapes[-1], shapes[layer.source + 1]))
                else:
                    shapes.append(layer.out_shape(shapes[-1]))
            except ShapeError as e:
                raise ShapeError(f"layer {i} {layer!r}: {e}") from None
        want = (self.n_classes,) if self.task == "classification" else None
        out = shapes[-1]
        if want is not None and out != want:
            raise ShapeError(f"classification output must be {want}, got {out}")
        if self.task == "segmentation" and (
            len(out) != 3 or out[:2] != self.input_shape[:2] or out[2] != self.n_classes
        ):
            raise ShapeError(f"segmentation output must be (H, W, {self.n_classes}), got {out}")
        return shapes

    def _check_params(self):
        for i, layer in enumerate(self.layers):
            for name in layer.param_names:
                key = f"{i}.{name}"
                if key not in self.params:
                    raise ValueError(f"missing parameter {key}")

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.shapes[-1]

    def layer_params(self, i: int) -> dict[str, np.ndarray]:
        return {n: self.params[f"{i}.{n}"] for n in self.layers[i].param_names}

    def check_input(self, x: np.ndarray) -> None:
        if tuple(x.shape[1:]) != self.input_shape:
            raise ShapeError(
                f"input shape {tuple(x.shape[1:])} does not match layer 0 "
                f"{self.layers[0]!r} expecting {self.input_shape}"
            )

    def forward_batch(self, x: np.ndarray, keep: bool = False, upto: int | None = None):
        """Run layers ``[0, upto)`` (all by default) on a batch.

        Returns the output, plus the per-layer caches when ``keep`` is true.
        """
        x = np.asarray(x, dtype=np.float64)
        self.check_input(x)
        n = len(self.layers) if upto is None else upto
        acts = [x]
        caches = []
        for i in range(n):
            layer = self.layers[i]
            p = self.layer_params(i)
            if isinstance(layer, SkipConcat):
                out, cache = layer.forward(acts[-1], p, skip=acts[layer.source + 1])
            else:
                out, cache = layer.forward(acts[-1], p)
            acts.append(out)
            caches.append(cache)
        if keep:
            return acts[-1], caches
        return acts[-1]

    def backward(self, caches, g_out: np.ndarray, param_grads: bool = True):
        """Propagate ``g_out`` back to the input; returns ``(g_input, grads)``."""
        n = len(caches)
        pending: dict[int, np.ndarray] = {}
        grads: dict[str, np.ndarray] = {}
        g = g_out
        for i in range(n - 1, -1, -1):
            if i + 1 in pending:
                g = g + pending.pop(i + 1)
            layer = self.layers[i]
            gx, pg = layer.backward(g, caches[i], self.layer_params(i), param_grads)
            if isinstance(layer, SkipConcat):
                gx, gskip = gx
                src = layer.source + 1
                pending[src] = pending[src] + gskip if src in pending else gskip
            if param_grads:
                for k, v in pg.items():
                    grads[f"{i}.{k}"] = v
            g = gx
        if 0 in pending:
            g = g + pending.pop(0)
        return g, grads

    def predict(self, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """Argmax labels for a batch of inputs."""
        out = [self.forward_batch(x[i : i + batch_size]).argmax(axis=-1)
               for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.zeros((0,), dtype=int)

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def architecture(self) -> dict:
        return {
            "layers": [layer.to_dict() for layer in self.layers],
            "input_shape": list(self.input_shape),
            "task": self.task,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_architecture(cls, arch: dict, params=None, seed: int = 0) -> "Network":
        return cls(
            [layer_from_dict(d) for d in arch["layers"]],
            arch["input_shape"],
            arch["task"],
            arch["n_classes"],
            params=params,
            seed=seed,
        )

    def __repr__(self) -> str:
        body = ", ".join(repr(layer) for layer in self.layers)
        return f"Network({self.task}, in={self.input_shape}, [{body}])"
