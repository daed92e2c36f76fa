"""Scalar evaluation metrics.

SSIM follows the usual reference setup: 11x11 Gaussian window with
sigma 1.5, K1=0.01, K2=0.03, data range 1, averaged over the valid region.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1, SSIM_K2 = 0.01, 0.03


def accuracy(preds, truths) -> float:
    preds, truths = np.asarray(preds), np.asarray(truths)
    if preds.shape != truths.shape:
        raise ValueError("preds and truths differ in shape")
    if preds.size == 0:
        raise ValueError("accuracy of an empty sequence")
    return float(np.mean(preds == truths))


def dice(pred, truth, c: int) -> float:
    """Dice overlap of class ``c``; 1.0 when both masks lack the class."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth differ in shape")
    a, b = pred == c, truth == c
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def mean_dice(pred, truth, classes: Iterable[int]) -> float:
    return float(np.mean([dice(pred, truth, c) for c in classes]))


def mse(x, x_hat) -> float:
    x, x_hat = np.asarray(x, dtype=np.float64), np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError("shapes differ")
    return float(np.mean((x - x_hat) ** 2))


def _gauss_window(size=SSIM_WIN, sigma=SSIM_SIGMA):
    r = np.arange(size) - (size - 1) / 2
    w = np.exp(-(r**2) / (2 * sigma**2))
    return w / w.sum()


_WIN = _gauss_window()


def _filt(a):
    # separable valid-mode Gaussian filter
    h = SSIM_WIN // 2
    a = correlate1d(a, _WIN, axis=0, mode="constant")[h:-h]
    return correlate1d(a, _WIN, axis=1, mode="constant")[:, h:-h]


def _ssim2d(x, y):
    C1 = (SSIM_K1 * 1.0) ** 2
    C2 = (SSIM_K2 * 1.0) ** 2
    mx, my = _filt(x), _filt(y)
    sxx = _filt(x * x) - mx * mx
    syy = _filt(y * y) - my * my
    sxy = _filt(x * y) - mx * my
    num = (2 * mx * my + C1) * (2 * sxy + C2)
    den = (mx * mx + my * my + C1) * (sxx + syy + C2)
    return float(np.mean(num / den))


def ssim(x, x_hat) -> float:
    """Mean SSIM of 2-D images, or ``(H, W, C)`` images averaged over channels."""
    x, x_hat = np.asarray(x, dtype=np.float64), np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError("shapes differ")
    if x.ndim not in (2, 3):
        raise ValueError("ssim needs a 2-D image or (H, W, C) stack")
    if x.shape[0] < SSIM_WIN or x.shape[1] < SSIM_WIN:
        raise ValueError(f"image {x.shape[:2]} smaller than the {SSIM_WIN}x{SSIM_WIN} window")
    if np.array_equal(x, x_hat):
        return 1.0
    if x.ndim == 2:
        return _ssim2d(x, x_hat)
    return float(np.mean([_ssim2d(x[..., c], x_hat[..., c]) for c in range(x.shape[2])]))


def ssim_defined(shape: Sequence[int]) -> bool:
    return len(shape) in (2, 3) and shape[0] >= SSIM_WIN and shape[1] >= SSIM_WIN


def roc_auc(scores, truths):
    """ROC curve by threshold sweep plus trapezoid AUC.

    Returns ``((fpr, tpr, thresholds), auc)``; tied scores move together, so
    they contribute a diagonal segment (half credit).
    """
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truths).astype(bool)
    if s.shape != t.shape or s.ndim != 1:
        raise ValueError("scores and truths must be equal-length 1-D sequences")
    n_pos, n_neg = int(t.sum()), int((~t).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative samples")
    thr = np.unique(s)[::-1]
    tp = np.array([np.sum(t & (s >= h)) for h in thr])
    fp = np.array([np.sum(~t & (s >= h)) for h in thr])
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    thresholds = np.concatenate([[np.inf], thr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return (fpr, tpr, thresholds), auc


def drop_points(clean: float, adv_avg: float) -> float:
    """Drop from clean to adversarial score, in percentage points."""
    return 100.0 * (clean - adv_avg)


@dataclass
class ScoreTable:
    """Scores keyed by ``(model, condition, metric)``.

    Conditions are ``clean``, ``noisy`` and one entry per attack; the
    adversarial average is taken over the attack conditions.
    """

    rows: dict[tuple[str, str, str], float] = field(default_factory=dict)

    def add(self, model: str, condition: str, metric: str, value: float) -> None:
        self.rows[(model, condition, metric)] = float(value)

    def get(self, model, condition, metric) -> float:
        return self.rows[(model, condition, metric)]

    def models(self) -> list[str]:
        return list(dict.fromkeys(m for m, _, _ in self.rows))

    def adversarial_average(self, model: str, metric: str) -> float:
        vals = [v for (m, c, k), v in self.rows.items()
                if m == model and k == metric and c not in ("clean", "noisy")]
        return float(np.mean(vals))

    def drops(self, metric: str) -> dict[str, float]:
        return {m: drop_points(self.get(m, "clean", metric), self.adversarial_average(m, metric))
                for m in self.models() if (m, "clean", metric) in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "condition", "metric", "value"])
        for (m, c, k), v in self.rows.items():
            w.writerow([m, c, k, repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScoreTable":
        out = cls()
        for row in csv.DictReader(io.StringIO(text)):
            out.add(row["model"], row["condition"], row["metric"], float(row["value"]))
        return out
