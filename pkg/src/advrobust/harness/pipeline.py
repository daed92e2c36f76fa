"""Pipeline stages: gen-data, train, craft, evaluate.

Directory layout::

    data/   classification/, segmentation/     TNSR dataset containers
    zoo/    config.toml, zoo.json, <model-id>/  checkpoints
    crafted/ records.csv, traces/, <model-id>/<attack>.tnsr
    eval/   scores.csv, pairs.csv, transfer.json, noise.csv, roc.csv,
            embeddings/, summary.json

Each task (model, image) gets its own RNG stream from
``derive_seed(master, ...)``, so thread count never changes results.
"""

from __future__ import annotations

import logging
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import architectures, cls_attacks, seg_attacks, tnsr
from ..diffnet import LossSpec, TrainConfig, embed, softmax, train
from ..metrics import ScoreTable, accuracy, dice, mean_dice, roc_auc, ssim
from ..noise import CalibrationError, NoiseConfig, apply_noise, calibrate_sigma_to_ssim
from ..synthdata import Dataset, generate, load_dataset, save_dataset
from . import store
from .config import (
    Config,
    config_hash,
    derive_seed,
    load_config,
    parse_config,
    parse_dataset_specs,
)

log = logging.getLogger(__name__)

TASKS = ("classification", "segmentation")


class PipelineError(RuntimeError):
    pass


def pmap(fn, items, threads: int = 1):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def model_id(arch: str, seed: int) -> str:
    return f"{arch}-s{seed}"


# ---------------------------------------------------------------- gen-data

def gen_data(spec_text: str, out_dir, seed: int | None = None) -> dict[str, Dataset]:
    specs = parse_dataset_specs(spec_text)
    out = Path(out_dir)
    t0 = time.perf_counter()
    result = {}
    for task, spec in specs.items():
        if seed is not None:
            spec.seed = derive_seed(seed, "data", task)
        ds = generate(spec)
        save_dataset(ds, out / task)
        result[task] = ds
    (out / "spec.toml").write_text(spec_text)
    store.write_run_manifest(out, "gen-data", config_hash(spec_text),
                             {t: s.spec.seed for t, s in result.items()},
                             {"gen-data": time.perf_counter() - t0})
    return result


# ---------------------------------------------------------------- train

@dataclass
class ZooEntry:
    id: str
    arch: str
    task: str
    seed: int
    checkpoint: str
    clean_score: float


def class_weights(labels, n_classes, mode):
    if mode == "uniform" or mode is None:
        return None
    if mode == "balanced":
        counts = np.bincount(np.asarray(labels).reshape(-1), minlength=n_classes).astype(float)
        w = counts.sum() / (n_classes * np.maximum(counts, 1.0))
        return [float(v) for v in w / w.mean()]
    w = [float(v) for v in mode]
    if len(w) != n_classes:
        raise PipelineError(f"class_weights needs {n_classes} entries")
    return w


def score_model(net, images, labels) -> float:
    preds = net.predict(images)
    if net.task == "classification":
        return accuracy(preds, labels)
    return segmentation_score(preds, labels, net.n_classes)


def segmentation_score(preds, labels, n_classes) -> float:
    """Mean over images of the foreground-averaged Dice."""
    fg = range(1, n_classes)
    return float(np.mean([mean_dice(p, y, fg) for p, y in zip(preds, labels)]))


def train_zoo(config_path, data_dir, out_dir, seed: int | None = None,
              threads: int | None = None) -> list[ZooEntry]:
    text = Path(config_path).read_text()
    cfg = load_config(config_path)
    master = cfg.seed if seed is None else seed
    threads = threads or cfg.threads
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(text)
    t0 = time.perf_counter()
    data = {t: load_dataset(Path(data_dir) / t) for t in TASKS if (Path(data_dir) / t).exists()}
    jobs = []
    for task in TASKS:
        if task not in data:
            continue
        for arch in getattr(cfg.zoo, task):
            for s in cfg.zoo.seeds:
                jobs.append((task, arch, s))

    def run(job):
        task, arch, s = job
        ds = data[task]
        sec = getattr(cfg.train, task)
        xtr, ytr = ds.split("train")
        init_seed = derive_seed(master, "init", arch, s)
        tcfg = TrainConfig(
            optimizer=sec.optimizer, lr=sec.lr, momentum=sec.momentum, lr_decay=sec.lr_decay,
            epochs=sec.epochs, batch_size=sec.batch_size,
            class_weights=class_weights(ytr, ds.n_classes, sec.class_weights),
            dice_weight=sec.dice_weight, weight_decay=sec.weight_decay, augment=sec.augment,
            seed=derive_seed(master, "train", arch, s),
        )
        net = architectures.build(arch, ds.images.shape[1:], ds.n_classes, seed=init_seed,
                                  width=cfg.zoo.width)
        net = train(net, xtr, ytr, tcfg)
        xte, yte = ds.split("test")
        clean = score_model(net, xte, yte)
        mid = model_id(arch, s)
        store.save_checkpoint(net, out / mid, {
            "model_id": mid, "arch": arch, "task": task, "zoo_seed": s, "seed": init_seed,
            "train_config": tcfg.to_dict(), "history": net.history, "clean_score": clean,
        })
        log.info("trained %s: clean %.3f", mid, clean)
        return ZooEntry(mid, arch, task, s, mid, clean)

    entries = pmap(run, jobs, threads)
    floors = {t: getattr(cfg.train, t).min_score for t in TASKS}
    bad = [f"{e.id} ({e.clean_score:.3f} < {floors[e.task]})" for e in entries
           if e.clean_score < floors[e.task]]
    zoo_warnings = _skip_warnings(entries)
    store.write_json(out / "zoo.json", {
        "master_seed": master,
        "data": os.path.relpath(Path(data_dir).resolve(), out.resolve()),
        "entries": [e.__dict__ for e in entries],
        "warnings": zoo_warnings,
    })
    store.write_run_manifest(out, "train", config_hash(text), {"master": master},
                             {"train": time.perf_counter() - t0})
    if bad:
        raise PipelineError("models below clean-score floor: " + ", ".join(bad))
    return entries


def _skip_warnings(entries) -> list[str]:
    by = {}
    for e in entries:
        by.setdefault(e.arch, []).append(e.clean_score)
    out = []
    if "fcn-plain" in by and "fcn-skip" in by:
        plain, skip = np.mean(by["fcn-plain"]), np.mean(by["fcn-skip"])
        if skip < plain:
            msg = f"fcn-skip clean Dice {skip:.3f} below fcn-plain {plain:.3f}"
            warnings.warn(msg, stacklevel=2)
            out.append(msg)
    return out


@dataclass
class Zoo:
    root: Path
    cfg: Config
    config_text: str
    master: int
    entries: list[ZooEntry]
    data: dict[str, Dataset]

    def models(self, task):
        for e in self.entries:
            if e.task == task:
                yield e, store.load_checkpoint(self.root / e.checkpoint)[0]


def open_zoo(zoo_dir, seed: int | None = None) -> Zoo:
    root = Path(zoo_dir)
    meta = store.read_json(root / "zoo.json")
    text = (root / "config.toml").read_text()
    cfg = parse_config(text)
    data_dir = (root / meta["data"]).resolve()
    data = {t: load_dataset(data_dir / t) for t in TASKS if (data_dir / t).exists()}
    entries = [ZooEntry(**e) for e in meta["entries"]]
    return Zoo(root, cfg, text, meta["master_seed"] if seed is None else seed, entries, data)


# ---------------------------------------------------------------- craft

def band_search(x, direction, lo, hi, alpha_hi, max_steps=60):
    """Scale ``alpha`` so that SSIM(x, clip(x + alpha * direction)) lands in [lo, hi].

    Returns ``(alpha, x_adv, ssim)``; if the band is out of reach the closest
    end point is returned.
    """
    mid = 0.5 * (lo + hi)
    tol = 0.25 * (hi - lo)
    f = lambda a: np.clip(x + a * direction, 0.0, 1.0)  # noqa: E731
    s_hi = ssim(x, f(alpha_hi))
    grow = 0
    while s_hi > mid and grow < 12:
        alpha_hi *= 2.0
        s_hi = ssim(x, f(alpha_hi))
        grow += 1
    if s_hi > mid:
        return alpha_hi, f(alpha_hi), s_hi
    a, b = 0.0, alpha_hi
    best = (alpha_hi, s_hi)
    for _ in range(max_steps):
        m = 0.5 * (a + b)
        s = ssim(x, f(m))
        if abs(s - mid) < abs(best[1] - mid):
            best = (m, s)
        if abs(s - mid) <= tol:
            break
        if s > mid:
            a = m
        else:
            b = m
    alpha = best[0]
    return alpha, f(alpha), best[1]


def _craft_cls(cfg: Config, net, x, y, attack):
    lo, hi = cfg.attacks.ssim_band
    y0 = cls_attacks.label(net, x)
    if attack == "fgsm":
        d = cls_attacks.fgsm_direction(net, x, y, LossSpec())
        eps, x_adv, _ = band_search(x, d, lo, hi, 0.05)
        res = cls_attacks.make_result(x, x_adv, cls_attacks.label(net, x_adv) != y, 1, 1)
        return res, {"param": eps, "stop": "band"}
    if attack == "deepfool":
        dc = cfg.attacks.deepfool
        raw = cls_attacks.deepfool(net, x, cls_attacks.DeepFoolConfig(dc.max_iter, dc.overshoot))
        ok = lambda xa: cls_attacks.label(net, xa) != y0  # noqa: E731
    else:
        sc = cfg.attacks.sma
        raw = cls_attacks.sma(net, x, cls_attacks.SmaConfig(None, sc.theta, sc.max_fraction, sc.pairs))
        t = raw.info["target"]
        ok = lambda xa: cls_attacks.label(net, xa) == t  # noqa: E731
    if not np.any(raw.perturbation):
        return raw, {"param": 1.0, "stop": "no-perturbation"}
    scale, x_adv, s = band_search(x, raw.perturbation, lo, hi, 1.0)
    if attack == "sma" and s > hi:
        # a few saturated border pixels barely move SSIM: keep adding salient
        # pixels past the target until the image itself enters the band
        raw = cls_attacks.sma(net, x, cls_attacks.SmaConfig(
            t, sc.theta, 1.0, sc.pairs, stop_ssim=0.5 * (lo + hi)))
        scale, x_adv, s = band_search(x, raw.perturbation, lo, hi, 1.0)
        raw.info["stop"] = "ssim-" + raw.info["stop"]
    res = cls_attacks.make_result(x, x_adv, ok(x_adv), raw.iterations, raw.grad_calls)
    return res, {"param": scale, "stop": raw.info.get("stop", "")}


def _dag_target(cfg: Config, y, attack, n_classes, seed):
    dc = cfg.attacks.dag
    if attack == "dag-a":
        return seg_attacks.target_type_a(y)
    if attack == "dag-b":
        return seg_attacks.target_type_b(y, dc.type_b_fraction, seed=seed, n_classes=n_classes)
    present = [c for c in range(1, n_classes) if np.any(y == c)]
    victim = present[np.random.default_rng(seed).integers(len(present))]
    return seg_attacks.target_type_c(y, victim, dc.type_c_radius)


def _craft_seg(cfg: Config, net, x, y, attack, seed):
    dc = cfg.attacks.dag
    try:
        target = _dag_target(cfg, y, attack, net.n_classes, seed)
    except (ValueError, IndexError) as e:
        res = cls_attacks.make_result(x, x, False, 0, 0)
        return res, {"param": 0.0, "stop": f"no target: {e}", "reached": 0.0}, None
    res = seg_attacks.dag_attack(net, x, y, target, seg_attacks.DagConfig(
        dc.max_iter, dc.step, 0, dc.spatial_mask))
    trace = res.info["trace"]
    reached = 1.0 - trace.active[-1] / len(target.target_set)
    return res, {"param": float(len(target.target_set)), "stop": res.info["stop"],
                 "reached": reached}, trace


RECORD_COLUMNS = ["model", "task", "attack", "index", "success", "iterations", "grad_calls",
                  "mse", "ssim", "linf", "param", "reached", "stop"]


def craft_suite(zoo_dir, out_dir, attacks: list[str] | None = None, seed: int | None = None,
                threads: int | None = None) -> list[dict]:
    zoo = open_zoo(zoo_dir, seed)
    cfg = zoo.cfg
    threads = threads or cfg.threads
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(exist_ok=True)
    t0 = time.perf_counter()
    wanted = {
        "classification": [a for a in cfg.attacks.classification if attacks is None or a in attacks],
        "segmentation": [a for a in cfg.attacks.segmentation if attacks is None or a in attacks],
    }
    if attacks is not None:
        unknown = set(attacks) - set(wanted["classification"]) - set(wanted["segmentation"])
        if unknown:
            raise PipelineError(f"unknown or unconfigured attack(s): {', '.join(sorted(unknown))}")
    records, warn_list = [], []
    for task in TASKS:
        if task not in zoo.data or not wanted[task]:
            continue
        ds = zoo.data[task]
        xte, yte = ds.split("test")
        for entry, net in zoo.models(task):
            for attack in wanted[task]:
                def job(i, entry=entry, net=net, attack=attack):
                    x, y = xte[i], yte[i]
                    if task == "classification":
                        res, extra = _craft_cls(cfg, net, x, int(y), attack)
                        extra["reached"] = float(res.success)
                        return res, extra, None
                    s = derive_seed(zoo.master, "target", attack, i)
                    return _craft_seg(cfg, net, x, y, attack, s)

                results = pmap(job, range(len(xte)), threads)
                (out / entry.id).mkdir(exist_ok=True)
                tnsr.save(out / entry.id / f"{attack}.tnsr", np.stack([r[0].x_adv for r in results]))
                rows = []
                for i, (res, extra, _) in enumerate(results):
                    rows.append({
                        "model": entry.id, "task": task, "attack": attack, "index": i,
                        "success": bool(res.success), "iterations": res.iterations,
                        "grad_calls": res.grad_calls, "mse": res.mse,
                        "ssim": res.ssim if res.ssim is not None else float("nan"),
                        "linf": res.linf, "param": float(extra["param"]),
                        "reached": float(extra["reached"]), "stop": extra["stop"],
                    })
                traces = [(i, tr) for i, (_, _, tr) in enumerate(results) if tr is not None]
                if traces:
                    text = "".join(tr.to_csv(header=(k == 0), prefix={"index": i})
                                   for k, (i, tr) in enumerate(traces))
                    (out / "traces" / f"{entry.id}_{attack}.csv").write_text(text)
                if not any(r["reached"] > 0 for r in rows):
                    raise PipelineError(f"attack {attack} failed on every image for {entry.id}")
                if attack.startswith("dag-"):
                    kind = attack[-1].upper()
                    msg = seg_attacks.check_mse_band(kind, float(np.mean([r["mse"] for r in rows])))
                    if msg:
                        warn_list.append(f"{entry.id}: {msg}")
                records.extend(rows)
                log.info("crafted %s / %s", entry.id, attack)
    (out / "records.csv").write_text(
        store.csv_text(RECORD_COLUMNS, ([r[c] for c in RECORD_COLUMNS] for r in records)))
    store.write_json(out / "crafted.json", {
        "zoo": os.path.relpath(Path(zoo_dir).resolve(), out.resolve()),
        "master_seed": zoo.master,
        "attacks": wanted,
        "warnings": warn_list,
    })
    store.write_run_manifest(out, "craft", config_hash(zoo.config_text), {"master": zoo.master},
                             {"craft": time.perf_counter() - t0})
    return records


# ---------------------------------------------------------------- evaluate

def _load_crafted(crafted_dir):
    root = Path(crafted_dir)
    meta = store.read_json(root / "crafted.json")
    recs = store.read_csv(root / "records.csv")
    return root, meta, recs


def _noisy_set(zoo: Zoo, task, xte, target_ssim, threads):
    cfg = zoo.cfg
    kind = getattr(cfg.noise, task)

    def job(i):
        s = derive_seed(zoo.master, "noise", task, i)
        x = xte[i]
        t = float(np.clip(target_ssim[i], 1e-3, 1 - 1e-6))
        try:
            nc = calibrate_sigma_to_ssim(x, kind, t, cfg.noise.tol, seed=s, n_seeds=cfg.noise.n_seeds)
        except CalibrationError as e:
            log.warning("noise calibration failed for image %d: %s", i, e)
            nc = NoiseConfig(kind, 0.5, s)
        xn = apply_noise(x, nc)
        return xn, nc.sigma, ssim(x, xn)

    res = pmap(job, range(len(xte)), threads)
    return np.stack([r[0] for r in res]), [(r[1], r[2]) for r in res]


def export_embeddings(net, sets: dict[str, tuple[np.ndarray, np.ndarray]]) -> str:
    """CSV of penultimate-layer embeddings tagged with condition and class."""
    rows = []
    dim = None
    for cond, (xs, ys) in sets.items():
        for i, (x, y) in enumerate(zip(xs, ys)):
            e = embed(net, x)
            dim = len(e)
            rows.append([cond, int(y), i] + [float(v) for v in e])
    header = ["condition", "label", "index"] + [f"e{k}" for k in range(dim or 0)]
    return store.csv_text(header, rows)


def transfer_eval(zoo_dir, crafted_dir, out_dir, seed: int | None = None,
                  threads: int | None = None) -> dict:
    zoo = open_zoo(zoo_dir, seed)
    cfg = zoo.cfg
    threads = threads or cfg.threads
    croot, cmeta, recs = _load_crafted(crafted_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    table = ScoreTable()
    pair_rows, noise_rows, roc_rows = [], [], []
    transfer = {}
    if cfg.eval.embeddings:
        (out / "embeddings").mkdir(exist_ok=True)
    for task in TASKS:
        attacks = cmeta["attacks"].get(task, [])
        if task not in zoo.data or not attacks:
            continue
        ds = zoo.data[task]
        xte, yte = ds.split("test")
        n = len(xte)
        loaded = list(zoo.models(task))
        if not loaded:
            continue
        ids = [e.id for e, _ in loaded]
        crafted = {}
        for mid in ids:
            for a in attacks:
                p = croot / mid / f"{a}.tnsr"
                if not p.exists():
                    raise PipelineError(f"missing crafted examples {mid}/{a}")
                crafted[(mid, a)] = tnsr.load(p)
        # noise matched per image to the mean SSIM of its adversarial versions
        ss = np.zeros(n)
        cnt = np.zeros(n)
        for r in recs:
            if r["task"] == task and r["ssim"] != "nan":
                ss[int(r["index"])] += float(r["ssim"])
                cnt[int(r["index"])] += 1
        target = np.where(cnt > 0, ss / np.maximum(cnt, 1), 0.98)
        noisy, noise_info = _noisy_set(zoo, task, xte, target, threads)
        for i, (sig, achieved) in enumerate(noise_info):
            noise_rows.append([task, i, float(target[i]), sig, achieved])

        def score(net, xs):
            preds = net.predict(xs)
            if task == "classification":
                return accuracy(preds, yte), preds
            return segmentation_score(preds, yte, net.n_classes), preds

        for entry, net in loaded:
            clean, cpred = score(net, xte)
            noisy_score, npred = score(net, noisy)
            table.add(entry.id, "clean", "score", clean)
            table.add(entry.id, "noisy", "score", noisy_score)
            if task == "segmentation":
                for c in range(1, net.n_classes):
                    for cond, pr in (("clean", cpred), ("noisy", npred)):
                        table.add(entry.id, cond, f"dice_c{c}",
                                  np.mean([dice(p, y, c) for p, y in zip(pr, yte)]))
            for a in attacks:
                bb_scores, bb_preds, bb_x = [], [], []
                for src in ids:
                    s_val, pr = score(net, crafted[(src, a)])
                    kind = "white" if src == entry.id else "black"
                    pair_rows.append([task, a, entry.id, src, kind, s_val])
                    if kind == "black":
                        bb_scores.append(s_val)
                        bb_preds.append(pr)
                        bb_x.append(crafted[(src, a)])
                table.add(entry.id, a, "score", float(np.mean(bb_scores)))
                if task == "segmentation":
                    for c in range(1, net.n_classes):
                        table.add(entry.id, a, f"dice_c{c}", float(np.mean(
                            [np.mean([dice(p, y, c) for p, y in zip(pr, yte)]) for pr in bb_preds])))
                if task == "classification":
                    xs = np.concatenate(bb_x)
                    _roc(roc_rows, table, net, entry.id, a, xs, np.tile(yte, len(bb_x)),
                         cfg.eval.roc_class)
            if task == "classification":
                _roc(roc_rows, table, net, entry.id, "clean", xte, yte, cfg.eval.roc_class)
                _roc(roc_rows, table, net, entry.id, "noisy", noisy, yte, cfg.eval.roc_class)
                if cfg.eval.embeddings:
                    adv = crafted[(entry.id, "fgsm")] if "fgsm" in attacks else crafted[(entry.id, attacks[0])]
                    text = export_embeddings(net, {"clean": (xte, yte), "noisy": (noisy, yte),
                                                   "adversarial": (adv, yte)})
                    (out / "embeddings" / f"{entry.id}.csv").write_text(text)
        archs = list(dict.fromkeys(e.arch for e, _ in loaded))
        arch_of = {e.id: e.arch for e, _ in loaded}
        for a in attacks:
            mat = []
            for ra in archs:
                row = []
                for ca in archs:
                    vals = [r[5] for r in pair_rows if r[0] == task and r[1] == a and r[4] == "black"
                            and arch_of[r[2]] == ra and arch_of[r[3]] == ca]
                    if not vals:
                        raise PipelineError(f"missing transfer cell {ra} <- {ca} for {a}")
                    row.append(float(np.mean(vals)))
                mat.append(row)
            transfer[a] = {"task": task, "rows_evaluated": archs, "cols_crafting": archs,
                           "values": mat}
    (out / "scores.csv").write_text(table.to_csv())
    (out / "pairs.csv").write_text(store.csv_text(
        ["task", "attack", "evaluated", "crafting", "box", "score"], pair_rows))
    (out / "noise.csv").write_text(store.csv_text(
        ["task", "index", "target_ssim", "sigma", "ssim"], noise_rows))
    (out / "roc.csv").write_text(store.csv_text(
        ["model", "condition", "fpr", "tpr"], roc_rows))
    store.write_json(out / "transfer.json", {
        "orientation": "rows = evaluated model architecture, columns = crafting architecture; "
                       "cells average all pairs of distinct (independently trained) models",
        "matrices": transfer,
    })
    summary = summarize(table, transfer, zoo, cmeta)
    store.write_json(out / "summary.json", summary)
    store.write_run_manifest(out, "evaluate", config_hash(zoo.config_text), {"master": zoo.master},
                             {"evaluate": time.perf_counter() - t0})
    return summary


def _roc(rows, table, net, mid, cond, xs, ys, cls):
    z = np.concatenate([net.forward_batch(xs[i:i + 64]) for i in range(0, len(xs), 64)])
    scores = softmax(z)[:, cls]
    truth = (np.asarray(ys) == cls)
    (fpr, tpr, _), auc = roc_auc(scores, truth)
    table.add(mid, cond, "auc", auc)
    for f, t in zip(fpr, tpr):
        rows.append([mid, cond, float(f), float(t)])


def summarize(table: ScoreTable, transfer: dict, zoo: Zoo, cmeta: dict) -> dict:
    """One robustness row (clean, noisy, adversarial average, drop) per zoo entry, plus transfer matrices."""
    rows = []
    for e in zoo.entries:
        if (e.id, "clean", "score") not in table.rows:
            continue
        attacks = cmeta["attacks"][e.task]
        clean = table.get(e.id, "clean", "score")
        adv = float(np.mean([table.get(e.id, a, "score") for a in attacks]))
        rows.append({
            "model": e.id, "arch": e.arch, "task": e.task, "seed": e.seed,
            "clean": clean, "noisy": table.get(e.id, "noisy", "score"),
            "adversarial_avg": adv, "drop_points": 100.0 * (clean - adv),
            "per_attack": {a: table.get(e.id, a, "score") for a in attacks},
        })
    return {"robustness": rows, "transfer": transfer,
            "warnings": list(cmeta.get("warnings", [])),
            "metric": {"classification": "accuracy", "segmentation": "mean foreground Dice"}}


# ---------------------------------------------------------------- whole run

def run_all(config_path, spec_path, out_dir, seed: int | None = None, threads: int | None = None,
            attacks: list[str] | None = None) -> dict:
    out = Path(out_dir)
    if seed is None:
        seed = load_config(config_path).seed
    gen_data(Path(spec_path).read_text(), out / "data", seed=seed)
    train_zoo(config_path, out / "data", out / "zoo", seed=seed, threads=threads)
    craft_suite(out / "zoo", out / "crafted", attacks=attacks, seed=seed, threads=threads)
    return transfer_eval(out / "zoo", out / "crafted", out / "eval", seed=seed, threads=threads)
