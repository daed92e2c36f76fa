"""
Noise and adversarial perturbations at equal SSIM
=================================================

Rescale FGSM so every example sits at SSIM 0.98, then calibrate Gaussian
noise to the same SSIM per image and compare the accuracy of an
independently trained model on both.
"""

import numpy as np

from advrobust import architectures
from advrobust.cls_attacks import fgsm_direction
from advrobust.diffnet import TrainConfig, train
from advrobust.harness.pipeline import band_search
from advrobust.metrics import accuracy, ssim
from advrobust.noise import apply_noise, calibrate_sigma_to_ssim
from advrobust.synthdata import DatasetSpec, generate

ds = generate(DatasetSpec("classification", seed=0))
(xtr, ytr), (xte, yte) = ds.split("train"), ds.split("test")
cfg = TrainConfig(epochs=30, weight_decay=1e-4)
source = train(architectures.build("mlp", xtr.shape[1:], 3, seed=1), xtr, ytr, cfg)
victim = train(architectures.build("mlp", xtr.shape[1:], 3, seed=2), xtr, ytr, cfg)

###############################################################################
# Black-box examples from the source model, SSIM-matched noise per image.

adv, noisy = [], []
for i, (x, y) in enumerate(zip(xte, yte)):
    d = fgsm_direction(source, x, int(y))
    _, xa, s = band_search(x, d, 0.97, 0.99, 0.05)
    adv.append(xa)
    noisy.append(apply_noise(x, calibrate_sigma_to_ssim(x, "gaussian", s, seed=i)))
adv, noisy = np.stack(adv), np.stack(noisy)

print(f"mean SSIM  adversarial {np.mean([ssim(a, b) for a, b in zip(xte, adv)]):.3f}"
      f"  noisy {np.mean([ssim(a, b) for a, b in zip(xte, noisy)]):.3f}")
for name, xs in (("clean", xte), ("noisy", noisy), ("adversarial", adv)):
    print(f"{name:12s} accuracy of the victim: {accuracy(victim.predict(xs), yte):.3f}")
