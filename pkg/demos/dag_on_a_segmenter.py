"""
Dense adversary generation on a segmenter
=========================================

Train a small skip-connected FCN on synthetic label maps and run the three
DAG target types against one test image.
"""

import numpy as np

from advrobust import architectures
from advrobust.diffnet import TrainConfig, train
from advrobust.metrics import mean_dice
from advrobust.seg_attacks import DagConfig, dag_attack, target_type_a, target_type_b, target_type_c
from advrobust.synthdata import DatasetSpec, generate

ds = generate(DatasetSpec("segmentation", n_samples=40, per_patient=2, seed=1))
(xtr, ytr), (xte, yte) = ds.split("train"), ds.split("test")
net = architectures.build("fcn-skip", xtr.shape[1:], ds.n_classes, seed=0)
net = train(net, xtr, ytr, TrainConfig(optimizer="adam", lr=1e-3, lr_decay=0.98, epochs=40,
                                       batch_size=8, dice_weight=0.5, seed=0))
fg = range(1, ds.n_classes)
print("clean Dice:", np.mean([mean_dice(p, t, fg) for p, t in zip(net.predict(xte), yte)]).round(3))

###############################################################################
# Targets
# -------
# A erases every structure, B retargets a random 5% of pixels and C grows
# the disk class outwards by two pixels.

x, y = xte[0], yte[0]
targets = {
    "A": target_type_a(y),
    "B": target_type_b(y, 0.05, seed=0, n_classes=ds.n_classes),
    "C": target_type_c(y, 1, radius=2),
}
for kind, t in targets.items():
    res = dag_attack(net, x, y, t, DagConfig(max_iter=100, step=1 / 255))
    tr = res.info["trace"]
    pred = net.predict(res.x_adv[None])[0]
    print(f"type {kind}: {len(t.target_set):4d} targeted pixels, {tr.active[-1]:4d} left after "
          f"{res.iterations} iterations, mse={res.mse:.4f}, Dice vs truth "
          f"{mean_dice(pred, y, fg):.3f} ({res.info['stop']})")

###############################################################################
# The trace
# ---------
# Each row is one iterate: how many targeted pixels still resist, the DAG
# loss and the size of the accumulated perturbation.

print(tr.to_csv().splitlines()[0])
for line in tr.to_csv().splitlines()[1::20]:
    print(line)
