"""Directional properties of the default desk-scale run (shared with the acceptance suite)."""

import csv
import io
import json

import numpy as np

from advrobust.harness import store


def _pairs(out):
    return store.read_csv(out / "eval" / "pairs.csv")


def test_zoo_counts(default_run):
    out, _ = default_run
    zoo = json.loads((out / "zoo" / "zoo.json").read_text())
    assert len(zoo["entries"]) == 15
    recs = store.read_csv(out / "crafted" / "records.csv")
    n_cls = sum(r["task"] == "classification" for r in recs)
    n_seg = sum(r["task"] == "segmentation" for r in recs)
    assert n_cls == 150 * 6 * 3
    assert n_seg == 12 * 9 * 3


def test_transfer_cells_bounded_by_clean(default_run):
    out, _ = default_run
    summary = json.loads((out / "eval" / "summary.json").read_text())
    clean = {r["model"]: r["clean"] for r in summary["robustness"]}
    for r in _pairs(out):
        if r["box"] == "black":
            assert 0 <= float(r["score"]) <= 1
    # each model's black-box average cannot beat its clean score (slack 0.02)
    for row in summary["robustness"]:
        for attack, v in row["per_attack"].items():
            assert v <= clean[row["model"]] + 0.02, (row["model"], attack)


def test_white_box_fgsm_beats_black_box(default_run):
    out, _ = default_run
    rows = [r for r in _pairs(out) if r["attack"] == "fgsm"]
    white = np.mean([float(r["score"]) for r in rows if r["box"] == "white"])
    black = np.mean([float(r["score"]) for r in rows if r["box"] == "black"])
    assert white <= black + 0.05


def test_adversarial_embeddings_leave_their_class(default_run):
    out, _ = default_run
    ratios = []
    for path in sorted((out / "eval" / "embeddings").glob("*.csv")):
        rows = list(csv.reader(io.StringIO(path.read_text())))[1:]
        cond = np.array([r[0] for r in rows])
        lab = np.array([int(r[1]) for r in rows])
        emb = np.array([[float(v) for v in r[3:]] for r in rows])
        d_noise, d_adv = [], []
        for c in np.unique(lab):
            centre = emb[(cond == "clean") & (lab == c)].mean(0)
            d_noise.append(np.linalg.norm(emb[(cond == "noisy") & (lab == c)].mean(0) - centre))
            d_adv.append(np.linalg.norm(emb[(cond == "adversarial") & (lab == c)].mean(0) - centre))
        ratios.append((np.mean(d_adv), np.mean(d_noise)))
    adv, noise = np.mean(ratios, axis=0)
    assert adv > noise


def test_skip_connections_help(default_run):
    out, _ = default_run
    summary = json.loads((out / "eval" / "summary.json").read_text())
    mean = lambda a: np.mean([r["clean"] for r in summary["robustness"] if r["arch"] == a])  # noqa: E731
    zoo = json.loads((out / "zoo" / "zoo.json").read_text())
    # soft property: a violation is recorded as a warning instead of failing training
    assert mean("fcn-skip") >= mean("fcn-plain") or zoo["warnings"]
