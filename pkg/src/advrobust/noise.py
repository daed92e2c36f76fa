"""Gaussian and Rician noise baselines with SSIM-matched calibration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import ssim

SIGMA_MAX = 0.5
CALIBRATION_SEEDS = 5
MAX_BISECTIONS = 60


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    kind: str = "gaussian"
    sigma: float = 0.0
    seed: int = 0
    search: str = "bisection"  # "golden" when SSIM(sigma) was not monotone

    def __post_init__(self):
        if self.kind not in ("gaussian", "rician"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def gaussian_noise(x, cfg: NoiseConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    return np.clip(x + cfg.sigma * rng.standard_normal(x.shape), 0.0, 1.0)


def rician_noise(x, cfg: NoiseConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    n1 = cfg.sigma * rng.standard_normal(x.shape)
    n2 = cfg.sigma * rng.standard_normal(x.shape)
    return np.clip(np.sqrt((x + n1) ** 2 + n2**2), 0.0, 1.0)


def apply_noise(x, cfg: NoiseConfig) -> np.ndarray:
    fn = gaussian_noise if cfg.kind == "gaussian" else rician_noise
    return fn(x, cfg)


def _mean_ssim(x, kind, sigma, seed, n_seeds):
    return float(np.mean([
        ssim(x, apply_noise(x, NoiseConfig(kind, sigma, seed + k))) for k in range(n_seeds)
    ]))


def calibrate_sigma_to_ssim(
    x,
    kind: str,
    target_ssim: float,
    tol: float = 0.005,
    seed: int = 0,
    n_seeds: int = CALIBRATION_SEEDS,
) -> NoiseConfig:
    """Find sigma in (0, 0.5] whose seed-averaged SSIM to ``x`` is within ``tol``.

    Seeds ``seed .. seed + n_seeds - 1`` are reused at every sigma, so the
    averaged SSIM is a deterministic function of sigma. The returned config
    carries ``seed`` (the first of those streams).
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 < target_ssim < 1.0:
        raise CalibrationError(f"target SSIM {target_ssim} outside the open interval (0, 1)")
    f = lambda s: _mean_ssim(x, kind, s, seed, n_seeds)  # noqa: E731
    lo_ssim = f(SIGMA_MAX)
    if target_ssim < lo_ssim - tol:
        raise CalibrationError(
            f"target SSIM {target_ssim} unattainable; achievable band is "
            f"[{lo_ssim:.4f}, 1) for sigma in (0, {SIGMA_MAX}]"
        )
    grid = np.linspace(0.0, SIGMA_MAX, 11)[1:]
    vals = [f(s) for s in grid]
    monotone = all(a >= b for a, b in zip(vals, vals[1:]))
    if monotone:
        lo, hi = 0.0, SIGMA_MAX
        for _ in range(MAX_BISECTIONS):
            mid = 0.5 * (lo + hi)
            v = f(mid)
            if abs(v - target_ssim) <= tol and mid > 0:
                return NoiseConfig(kind, mid, seed)
            if v > target_ssim:
                lo = mid
            else:
                hi = mid
    else:
        # golden section on |SSIM - target| over the grid cell nearest the target
        k = int(np.argmin([abs(v - target_ssim) for v in vals]))
        a, b = (grid[k - 1] if k else 0.0), grid[min(k + 1, len(grid) - 1)]
        g = (np.sqrt(5) - 1) / 2
        err = lambda s: abs(f(s) - target_ssim)  # noqa: E731
        c, d = b - g * (b - a), a + g * (b - a)
        for _ in range(MAX_BISECTIONS):
            if err(c) < err(d):
                b = d
            else:
                a = c
            c, d = b - g * (b - a), a + g * (b - a)
            mid = 0.5 * (a + b)
            if mid > 0 and err(mid) <= tol:
                return NoiseConfig(kind, mid, seed, search="golden")
    raise CalibrationError(
        f"target SSIM {target_ssim} not reached within {MAX_BISECTIONS} steps; "
        f"achievable band is [{lo_ssim:.4f}, 1)"
    )
