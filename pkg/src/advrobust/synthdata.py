"""Seeded toy datasets: textured blobs (classification), nested shapes (segmentation).

Samples are generated per "patient": a patient fixes the geometry and
receives several jittered images, and splits are made over patients so no
patient straddles train and test.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import tnsr

TASKS = ("classification", "segmentation")


@dataclass
class DatasetSpec:
    task: str = "classification"
    n_samples: int = 300
    image_size: int | None = None  # 16 (classification) / 32 (segmentation)
    n_classes: int | None = None  # 3 / 4 foreground classes (+ background)
    noise_floor: float = 0.03
    seed: int = 0
    train_fraction: float | None = None  # 0.5 / 0.8
    per_patient: int = 2

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        cls = self.task == "classification"
        if self.image_size is None:
            self.image_size = 16 if cls else 32
        if self.n_classes is None:
            self.n_classes = 3 if cls else 4
        if self.train_fraction is None:
            self.train_fraction = 0.5 if cls else 0.8
        if self.n_samples < 2 or self.per_patient < 1:
            raise ValueError("need n_samples >= 2 and per_patient >= 1")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.image_size % 4:
            raise ValueError("image_size must be a multiple of 4")

    @property
    def total_classes(self) -> int:
        return self.n_classes + (self.task == "segmentation")


@dataclass
class Dataset:
    images: np.ndarray  # (n, H, W, 1)
    labels: np.ndarray  # (n,) or (n, H, W) ints
    groups: np.ndarray  # (n,) patient ids
    train_idx: np.ndarray
    test_idx: np.ndarray
    spec: DatasetSpec = field(default_factory=DatasetSpec)

    @property
    def n_classes(self) -> int:
        return self.spec.total_classes

    def split(self, which: str):
        idx = self.train_idx if which == "train" else self.test_idx
        return self.images[idx], self.labels[idx]


# per-class blob intensity, radius and stripe frequency (cycles / pixel)
_BLOB_INTENSITY = np.array([0.50, 0.62, 0.74, 0.44, 0.80, 0.56])
_BLOB_RADIUS = np.array([3.2, 4.2, 5.2, 4.8, 3.6, 5.6])
_BLOB_FREQ = np.array([0.12, 0.22, 0.32, 0.40, 0.28, 0.18])


def _blob(rng, size, c, geom, noise_floor):
    cy, cx, theta, phase = geom
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    k = c % len(_BLOB_INTENSITY)
    cy = cy + rng.uniform(-0.7, 0.7)
    cx = cx + rng.uniform(-0.7, 0.7)
    radius = _BLOB_RADIUS[k] + rng.uniform(-0.6, 0.6)
    inten = _BLOB_INTENSITY[k] + rng.uniform(-0.07, 0.07)
    d = np.hypot(yy - cy, xx - cx)
    weight = 1.0 / (1.0 + np.exp((d - radius) / 0.6))
    u = np.cos(theta) * xx + np.sin(theta) * yy
    stripes = 0.12 * np.sin(2 * np.pi * _BLOB_FREQ[k] * u + phase)
    img = 0.2 + weight * (inten - 0.2 + stripes)
    img = img + noise_floor * rng.standard_normal(img.shape)
    return np.clip(img, 0.0, 1.0)


def _patient_split(groups, classes, frac, rng):
    """Pick whole patients for training, balanced per class when possible."""
    train_groups = []
    for c in np.unique(classes):
        gs = np.unique(groups[classes == c])
        gs = rng.permutation(gs)
        train_groups.extend(gs[: int(round(frac * len(gs)))].tolist())
    mask = np.isin(groups, train_groups)
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def gen_classification(spec: DatasetSpec) -> Dataset:
    if spec.task != "classification":
        raise ValueError("spec.task must be 'classification'")
    rng = np.random.default_rng(spec.seed)
    S, C, n = spec.image_size, spec.n_classes, spec.n_samples
    labels = np.arange(n) % C  # balanced within 1
    groups = np.zeros(n, dtype=np.int64)
    images = np.zeros((n, S, S, 1))
    # patients own per_patient consecutive samples of one class
    order = np.argsort(labels, kind="stable")
    pid = 0
    geom = None
    for j, i in enumerate(order):
        if j % spec.per_patient == 0 or labels[order[j - 1]] != labels[i]:
            pid += 1
            geom = (
                S / 2 + rng.uniform(-1.5, 1.5),
                S / 2 + rng.uniform(-1.5, 1.5),
                rng.uniform(0, np.pi),
                rng.uniform(0, 2 * np.pi),
            )
        groups[i] = pid
        images[i, :, :, 0] = _blob(rng, S, int(labels[i]), geom, spec.noise_floor)
    tr, te = _patient_split(groups, labels, spec.train_fraction, rng)
    return Dataset(images, labels, groups, tr, te, spec)


_SEG_INTENSITY = {0: 0.10, 1: 0.85, 2: 0.55, 3: 0.35, 4: 0.68}


def _shapes(rng, S, geom, n_fg, noise_floor):
    """Draw stripe (4), rectangle (3), ring (2) and disk (1) back to front."""
    cy, cx, r_disk, ring_w, rect, stripe = geom
    yy, xx = np.mgrid[0:S, 0:S]
    lab = np.zeros((S, S), dtype=np.int64)
    jit = lambda: rng.integers(-1, 2)  # noqa: E731
    if n_fg >= 4:
        orient, pos = stripe
        pos = pos + jit()
        if orient == 0:
            lab[(yy >= pos) & (yy < pos + 2)] = 4
        else:
            lab[(xx >= pos) & (xx < pos + 2)] = 4
    if n_fg >= 3:
        ry, rx, h, w = rect
        ry, rx = ry + jit(), rx + jit()
        lab[(yy >= ry) & (yy < ry + h) & (xx >= rx) & (xx < rx + w)] = 3
    cyj, cxj = cy + rng.uniform(-1, 1), cx + rng.uniform(-1, 1)
    d = np.hypot(yy - cyj, xx - cxj)
    if n_fg >= 2:
        lab[d < r_disk + ring_w] = 2
    lab[d < r_disk] = 1
    img = np.zeros((S, S))
    for c in range(n_fg + 1):
        base = _SEG_INTENSITY.get(c, 0.1 + 0.8 * c / (n_fg + 1))
        img[lab == c] = base + rng.uniform(-0.04, 0.04)
    img = img + noise_floor * rng.standard_normal(img.shape)
    return np.clip(img, 0.0, 1.0), lab


def gen_segmentation(spec: DatasetSpec) -> Dataset:
    if spec.task != "segmentation":
        raise ValueError("spec.task must be 'segmentation'")
    if not 1 <= spec.n_classes <= 4:
        raise ValueError("segmentation supports 1-4 foreground classes")
    rng = np.random.default_rng(spec.seed)
    S, n = spec.image_size, spec.n_samples
    images = np.zeros((n, S, S, 1))
    labels = np.zeros((n, S, S), dtype=np.int64)
    groups = np.zeros(n, dtype=np.int64)
    geom = None
    q = S // 4
    for i in range(n):
        if i % spec.per_patient == 0:
            r_disk = rng.uniform(0.14, 0.2) * S
            ring_w = rng.uniform(0.06, 0.1) * S
            cy = S / 2 + rng.uniform(-0.08, 0.08) * S
            cx = S / 2 + rng.uniform(-0.08, 0.08) * S
            corner = rng.integers(4)
            h, w = int(rng.integers(q, q + 3)), int(rng.integers(q, q + 3))
            ry = 1 if corner < 2 else S - h - 1
            rx = 1 if corner % 2 == 0 else S - w - 1
            orient = int(rng.integers(2))
            # keep the stripe along the edge opposite the rectangle
            near_low = corner < 2 if orient == 0 else corner % 2 == 0
            edge = S - 4 if near_low else 2
            geom = (cy, cx, r_disk, ring_w, (ry, rx, h, w), (orient, edge))
        groups[i] = i // spec.per_patient
        img, lab = _shapes(rng, S, geom, spec.n_classes, spec.noise_floor)
        images[i, :, :, 0] = img
        labels[i] = lab
    order = rng.permutation(np.unique(groups))
    n_train = int(round(spec.train_fraction * len(order)))
    mask = np.isin(groups, order[:n_train])
    return Dataset(images, labels, groups, np.flatnonzero(mask), np.flatnonzero(~mask), spec)


def generate(spec: DatasetSpec) -> Dataset:
    return gen_classification(spec) if spec.task == "classification" else gen_segmentation(spec)


def save_dataset(ds: Dataset, directory) -> Path:
    return tnsr.save_container(
        directory,
        {
            "images": ds.images,
            "labels": ds.labels,
            "groups": ds.groups,
            "train_idx": ds.train_idx,
            "test_idx": ds.test_idx,
        },
        {"spec": asdict(ds.spec)},
    )


def load_dataset(directory) -> Dataset:
    t, meta = tnsr.load_container(directory)
    as_int = lambda a: np.rint(a).astype(np.int64)  # noqa: E731
    return Dataset(
        t["images"],
        as_int(t["labels"]),
        as_int(t["groups"]),
        as_int(t["train_idx"]),
        as_int(t["test_idx"]),
        DatasetSpec(**meta["spec"]),
    )
