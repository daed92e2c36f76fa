"""Render ``summary.json`` from the evaluate stage as CSV, JSON or Markdown."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import store

FORMATS = ("csv", "json", "md")

ORIENTATION = "rows = evaluated architecture, columns = crafting architecture"


def arch_means(rows: list[dict]) -> list[dict]:
    """Average per-model robustness rows over the seeds of each architecture."""
    by: dict[str, list[dict]] = {}
    for r in rows:
        by.setdefault(r["arch"], []).append(r)
    out = []
    for arch, rs in by.items():
        clean = float(np.mean([r["clean"] for r in rs]))
        adv = float(np.mean([r["adversarial_avg"] for r in rs]))
        out.append({
            "arch": arch, "task": rs[0]["task"], "n_seeds": len(rs), "clean": clean,
            "noisy": float(np.mean([r["noisy"] for r in rs])),
            "adversarial_avg": adv, "drop_points": 100.0 * (clean - adv),
        })
    return out


def _robustness_csv(summary) -> str:
    cols = ["model", "arch", "task", "seed", "clean", "noisy", "adversarial_avg", "drop_points"]
    return store.csv_text(cols, ([r[c] for c in cols] for r in summary["robustness"]))


def _transfer_csv(summary) -> str:
    rows = []
    for attack, m in sorted(summary["transfer"].items()):
        for ra, vals in zip(m["rows_evaluated"], m["values"]):
            for ca, v in zip(m["cols_crafting"], vals):
                rows.append([m["task"], attack, ra, ca, v])
    return store.csv_text(["task", "attack", "evaluated", "crafting", "score"], rows)


def _md(summary) -> str:
    lines = ["# Robustness report", ""]
    metric = summary.get("metric", {})
    for task in ("classification", "segmentation"):
        rows = [r for r in summary["robustness"] if r["task"] == task]
        if not rows:
            continue
        lines += [f"## {task.capitalize()} ({metric.get(task, 'score')})", "",
                  "| model | clean | noise | adversarial avg | drop (points) |",
                  "|---|---|---|---|---|"]
        for r in rows:
            lines.append(f"| {r['model']} | {r['clean']:.3f} | {r['noisy']:.3f} | "
                         f"{r['adversarial_avg']:.3f} | {r['drop_points']:.2f} |")
        for r in arch_means(rows):
            lines.append(f"| **{r['arch']}** (mean of {r['n_seeds']}) | {r['clean']:.3f} | "
                         f"{r['noisy']:.3f} | {r['adversarial_avg']:.3f} | {r['drop_points']:.2f} |")
        lines.append("")
    if summary["transfer"]:
        lines += ["## Black-box transfer", "", f"Orientation: {ORIENTATION}.", ""]
        for attack, m in sorted(summary["transfer"].items()):
            cols = m["cols_crafting"]
            lines += [f"### {attack}", "", "| evaluated \\ crafting | " + " | ".join(cols) + " |",
                      "|---" * (len(cols) + 1) + "|"]
            for ra, vals in zip(m["rows_evaluated"], m["values"]):
                lines.append(f"| {ra} | " + " | ".join(f"{v:.3f}" for v in vals) + " |")
            lines.append("")
    if summary.get("warnings"):
        lines += ["## Warnings", ""] + [f"- {w}" for w in summary["warnings"]] + [""]
    return "\n".join(lines)


def render_report(summary: dict, fmt: str) -> dict[str, str]:
    """Return ``{filename: text}`` for the requested format."""
    if fmt == "csv":
        return {"report_robustness.csv": _robustness_csv(summary),
                "report_transfer.csv": _transfer_csv(summary)}
    if fmt == "json":
        doc = {**summary, "arch_means": arch_means(summary["robustness"]), "orientation": ORIENTATION}
        return {"report.json": store.dump_json(doc)}
    if fmt == "md":
        return {"report.md": _md(summary)}
    raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")


def write_report(in_dir, fmt: str, out_dir=None) -> list[Path]:
    src = Path(in_dir)
    path = src / "summary.json"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run the evaluate stage first")
    dest = Path(out_dir) if out_dir else src
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_report(store.read_json(path), fmt).items():
        (dest / name).write_text(text)
        written.append(dest / name)
    return written
