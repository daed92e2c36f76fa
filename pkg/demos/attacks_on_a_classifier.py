"""
Three attacks on a small CNN
============================

Train a CNN on the synthetic blob suite, then craft FGSM, DeepFool and
saliency-map examples for one test image and compare how far each moves it.
"""

import numpy as np

from advrobust import architectures
from advrobust.cls_attacks import DeepFoolConfig, FgsmConfig, SmaConfig, deepfool, fgsm, label, sma
from advrobust.diffnet import TrainConfig, train
from advrobust.metrics import accuracy
from advrobust.synthdata import DatasetSpec, generate

###############################################################################
# Data and model
# --------------
# 300 images of 16x16 pixels, three classes, split by patient.

ds = generate(DatasetSpec("classification", seed=0))
(xtr, ytr), (xte, yte) = ds.split("train"), ds.split("test")
net = architectures.build("cnn", xtr.shape[1:], ds.n_classes, seed=0)
net = train(net, xtr, ytr, TrainConfig(epochs=30, weight_decay=1e-4, seed=0))
print(f"clean test accuracy: {accuracy(net.predict(xte), yte):.3f}")

###############################################################################
# One image, three attacks
# ------------------------
# FGSM takes a single signed-gradient step; DeepFool walks to the nearest
# linearised boundary; SMA raises a handful of salient pixels.

x, y = xte[0], int(yte[0])
results = {
    "fgsm": fgsm(net, x, y, FgsmConfig(epsilon=0.05)),
    "deepfool": deepfool(net, x, DeepFoolConfig()),
    "sma": sma(net, x, SmaConfig()),
}
print(f"true label {y}, predicted {label(net, x)}")
for name, r in results.items():
    print(f"{name:9s} -> label {label(net, r.x_adv)}  success={r.success!s:5s} "
          f"linf={r.linf:.3f} mse={r.mse:.5f} ssim={r.ssim:.3f} gradient calls={r.grad_calls}")

###############################################################################
# Where the perturbation lives
# ----------------------------
# Count the pixels each attack touched: FGSM spreads over the whole image,
# SMA stays sparse.

for name, r in results.items():
    print(f"{name:9s} modified {np.count_nonzero(r.perturbation):3d} of {x.size} pixels")
