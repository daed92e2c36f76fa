"""Dense adversary generation (DAG) for per-pixel classifiers.

Target maps come in three flavours: A (everything becomes background),
B (a random pixel subset flips to random other classes) and C (one class is
dilated over its neighbours).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_dilation

from .cls_attacks import AttackResult, make_result
from .diffnet import Network

# reference distortion levels for MSE(x, x_adv); checked as a soft band
MSE_REFERENCE = {"A": 0.004, "B": 0.002, "C": 0.002}
MSE_BAND = 0.5


class EmptyTargetError(ValueError):
    pass


@dataclass
class DagTarget:
    y_adv: np.ndarray  # (H, W) int
    target_set: np.ndarray  # (n, 2) int pixel coordinates, row-major order
    kind: str

    def __post_init__(self):
        self.y_adv = np.asarray(self.y_adv).astype(np.int64)
        self.target_set = np.asarray(self.target_set, dtype=np.int64).reshape(-1, 2)
        if self.kind not in ("A", "B", "C"):
            raise ValueError(f"unknown target kind {self.kind!r}")

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.y_adv.shape, dtype=bool)
        m[self.target_set[:, 0], self.target_set[:, 1]] = True
        return m

    def validate(self, y) -> None:
        y = np.asarray(y)
        if y.shape != self.y_adv.shape:
            raise ValueError("target map and ground truth differ in shape")
        if len(self.target_set) == 0:
            raise EmptyTargetError("empty target set")
        r, c = self.target_set.T
        if np.any(self.y_adv[r, c] == y[r, c]):
            raise ValueError("target class equals ground truth on a targeted pixel")


def _coords(mask) -> np.ndarray:
    return np.argwhere(mask).astype(np.int64)


def target_type_a(y, background: int = 0) -> DagTarget:
    y = np.asarray(y).astype(np.int64)
    mask = y != background
    if not mask.any():
        raise EmptyTargetError("empty target set: label map is entirely background")
    return DagTarget(np.full_like(y, background), _coords(mask), "A")


def target_type_b(y, fraction: float = 0.05, seed: int = 0, n_classes: int | None = None) -> DagTarget:
    """Uniformly pick ``ceil(fraction * N)`` pixels and give each a random wrong class."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    y = np.asarray(y).astype(np.int64)
    C = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if C < 2:
        raise ValueError("need at least 2 classes")
    rng = np.random.default_rng(seed)
    N = y.size
    k = math.ceil(fraction * N)
    flat = np.sort(rng.choice(N, size=k, replace=False))
    # offset in [1, C-1] guarantees a class different from the truth
    offsets = rng.integers(1, C, size=k)
    y_adv = y.copy().reshape(-1)
    y_adv[flat] = (y_adv[flat] + offsets) % C
    coords = np.stack(np.unravel_index(flat, y.shape), axis=1)
    return DagTarget(y_adv.reshape(y.shape), coords, "B")


def target_type_c(y, victim_class: int, radius: int = 2) -> DagTarget:
    """Grow ``victim_class`` by a square dilation of side ``2 * radius + 1``."""
    y = np.asarray(y).astype(np.int64)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    support = y == victim_class
    if not support.any():
        raise ValueError(f"victim class {victim_class} absent from label map")
    grown = binary_dilation(support, structure=np.ones((2 * radius + 1,) * 2, dtype=bool))
    flip = grown & ~support
    if not flip.any():
        raise EmptyTargetError("empty target set: dilation adds no pixels")
    y_adv = y.copy()
    y_adv[flip] = victim_class
    return DagTarget(y_adv, _coords(flip), "C")


def dag_loss(z, y, y_adv, target_set) -> float:
    """Sum over targeted pixels of (true-class logit - target-class logit)."""
    z = np.asarray(z, dtype=np.float64)
    ts = np.asarray(target_set, dtype=np.int64).reshape(-1, 2)
    if len(ts) == 0:
        raise EmptyTargetError("empty target set")
    r, c = ts.T
    y, y_adv = np.asarray(y), np.asarray(y_adv)
    return float(np.sum(z[r, c, y[r, c]] - z[r, c, y_adv[r, c]]))


def _backprop_direction(model, caches, z_shape, y, y_adv, active):
    dz = np.zeros((1,) + tuple(z_shape))
    r, c = np.asarray(active, dtype=np.int64).reshape(-1, 2).T
    np.add.at(dz, (0, r, c, y_adv[r, c]), 1.0)
    np.add.at(dz, (0, r, c, y[r, c]), -1.0)
    g, _ = model.backward(caches, dz, param_grads=False)
    return g[0]


def dag_direction(model: Network, x, y, y_adv, active) -> tuple[np.ndarray, np.ndarray]:
    """Logits at ``x`` and ``sum_{t in active} grad(z_{y'} - z_y)`` in one backward pass."""
    z, caches = model.forward_batch(np.asarray(x, dtype=np.float64)[None], keep=True)
    y, y_adv = np.asarray(y).astype(np.int64), np.asarray(y_adv).astype(np.int64)
    return z[0], _backprop_direction(model, caches, z.shape[1:], y, y_adv, active)


@dataclass(frozen=True)
class DagConfig:
    max_iter: int = 200
    step: float = 1 / 255  # L-inf size of each normalised step
    background: int = 0
    spatial_mask: bool = False  # restrict r_m to the targeted pixels

    def __post_init__(self):
        if self.max_iter < 1 or not self.step > 0:
            raise ValueError("DAG needs max_iter >= 1 and step > 0")


@dataclass
class DagTrace:
    iteration: list[int] = field(default_factory=list)
    active: list[int] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    linf: list[float] = field(default_factory=list)
    mse: list[float] = field(default_factory=list)

    def record(self, m, n_active, loss, r_total):
        self.iteration.append(m)
        self.active.append(int(n_active))
        self.loss.append(float(loss))
        self.linf.append(float(np.abs(r_total).max()))
        self.mse.append(float(np.mean(r_total**2)))

    def to_csv(self, header: bool = True, prefix: dict | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        pre = dict(prefix or {})
        if header:
            w.writerow(list(pre) + ["iteration", "active", "dag_loss", "linf", "mse"])
        for row in zip(self.iteration, self.active, self.loss, self.linf, self.mse):
            w.writerow(list(pre.values()) + [row[0], row[1]] + [repr(v) for v in row[2:]])
        return buf.getvalue()


def dag_attack(model: Network, x, y, target: DagTarget, cfg: DagConfig = DagConfig()) -> AttackResult:
    """Iterate DAG steps until every targeted pixel predicts its target class.

    ``info["trace"]`` holds one :class:`DagTrace` row per evaluated iterate;
    the last row describes the returned image.
    """
    if model.task != "segmentation":
        raise ValueError("DAG needs a segmentation model")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    target.validate(y)
    y_adv = target.y_adv
    T = target.target_set
    tr, tc = T.T
    mask = target.mask[..., None] if cfg.spatial_mask else None
    trace = DagTrace()
    x_m = x.copy()
    reason = "max_iter"
    success = False
    m = 0
    calls = 0
    while True:
        z, caches = model.forward_batch(x_m[None], keep=True)
        z = z[0]
        still = z[tr, tc].argmax(axis=-1) != y_adv[tr, tc]
        trace.record(m, still.sum(), dag_loss(z, y, y_adv, T), x_m - x)
        if not still.any():
            success, reason = True, "target"
            break
        if m >= cfg.max_iter:
            break
        r = _backprop_direction(model, caches, z.shape, y, y_adv, T[still])
        calls += 1
        if mask is not None:
            r = r * mask
        norm = float(np.abs(r).max())
        if norm < 1e-12:
            reason = "vanishing gradient"
            break
        x_m = np.clip(x_m + (cfg.step / norm) * r, 0.0, 1.0)
        m += 1
    return make_result(x, x_m, success, m, calls, trace=trace, stop=reason, kind=target.kind)


def check_mse_band(kind: str, value: float) -> str | None:
    """Warning text when ``value`` strays beyond +-50% of the reference level."""
    ref = MSE_REFERENCE[kind]
    if abs(value - ref) <= MSE_BAND * ref:
        return None
    msg = f"DAG type {kind}: MSE {value:.5f} outside reference band {ref} +- {int(MSE_BAND * 100)}%"
    warnings.warn(msg, stacklevel=2)
    return msg
