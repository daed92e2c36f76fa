"""On-disk layout helpers: checkpoints, CSV tables, run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .. import __version__, tnsr
from ..diffnet import Network

RUN_MANIFEST = "run_manifest.json"
TIMINGS = "timings.json"


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dump_json(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def save_checkpoint(net: Network, directory, meta: Mapping) -> None:
    tnsr.save_container(directory, net.params, {"architecture": net.architecture(), **meta})


def load_checkpoint(directory) -> tuple[Network, dict]:
    params, meta = tnsr.load_container(directory)
    net = Network.from_architecture(meta["architecture"], params=params, seed=meta.get("seed", 0))
    net.history = list(meta.get("history", []))
    return net, meta


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def inventory(directory) -> dict[str, str]:
    d = Path(directory)
    out = {}
    for p in sorted(d.rglob("*")):
        if p.is_file() and p.name not in (RUN_MANIFEST, TIMINGS):
            out[p.relative_to(d).as_posix()] = sha256_file(p)
    return out


def write_run_manifest(directory, stage: str, config_hash: str, seeds: Mapping, timings: Mapping) -> None:
    """Deterministic manifest plus a separate wall-clock ``timings.json``."""
    d = Path(directory)
    write_json(d / TIMINGS, {"stage": stage, "seconds": dict(timings)})
    write_json(d / RUN_MANIFEST, {
        "stage": stage,
        "config_hash": config_hash,
        "seeds": dict(seeds),
        "toolkit_version": __version__,
        "timings_file": TIMINGS,
        "files": inventory(d),
    })
