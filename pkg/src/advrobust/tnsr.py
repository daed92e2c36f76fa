"""TNSR binary tensor files and tensor containers.

File layout (all little-endian)::

    b"TNSR" | u8 version (=1) | u8 dtype (1=f32, 2=f64) | u8 rank
    | rank x u32 dims | row-major payload

A container is a directory holding one ``.tnsr`` file per tensor plus a
``manifest.json`` index naming each file and carrying free-form metadata.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np

MAGIC = b"TNSR"
VERSION = 1
DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
DTYPE_CODES = {np.dtype("float32"): 1, np.dtype("float64"): 2}
MANIFEST = "manifest.json"


class TnsrError(ValueError):
    pass


def encode(array: np.ndarray, dtype: str = "f64") -> bytes:
    code = {"f32": 1, "f64": 2}[dtype]
    a = np.asarray(array, dtype=DTYPES[code], order="C")
    if a.ndim > 255:
        raise TnsrError(f"rank {a.ndim} exceeds 255")
    if any(d >= 2**32 for d in a.shape):
        raise TnsrError(f"dimension too large: {a.shape}")
    header = MAGIC + struct.pack("<BBB", VERSION, code, a.ndim)
    header += struct.pack(f"<{a.ndim}I", *a.shape)
    return header + a.tobytes(order="C")


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < 7 or buf[:4] != MAGIC:
        raise TnsrError("bad magic: not a TNSR file")
    version, code, rank = struct.unpack_from("<BBB", buf, 4)
    if version != VERSION:
        raise TnsrError(f"unsupported TNSR version {version}")
    if code not in DTYPES:
        raise TnsrError(f"unknown dtype code {code}")
    off = 7 + 4 * rank
    if len(buf) < off:
        raise TnsrError("truncated header")
    dims = struct.unpack_from(f"<{rank}I", buf, 7)
    dt = DTYPES[code]
    count = int(np.prod(dims, dtype=np.int64))
    if len(buf) != off + count * dt.itemsize:
        raise TnsrError(
            f"payload size {len(buf) - off} does not match dims {dims} ({dt})"
        )
    out = np.frombuffer(buf, dtype=dt, count=count, offset=off).reshape(dims)
    return out.astype(np.float64)


def save(path: str | os.PathLike, array: np.ndarray, dtype: str = "f64") -> None:
    Path(path).write_bytes(encode(array, dtype))


def load(path: str | os.PathLike) -> np.ndarray:
    return decode(Path(path).read_bytes())


def _dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_container(
    directory: str | os.PathLike,
    tensors: Mapping[str, np.ndarray],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """Write ``tensors`` under ``directory`` with a manifest index.

    Tensor names may contain dots; they are used verbatim as file stems.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    index = {}
    for name in sorted(tensors):
        arr = np.asarray(tensors[name], dtype=np.float64)
        fname = f"{name}.tnsr"
        save(d / fname, arr)
        index[name] = {"file": fname, "shape": list(arr.shape), "dtype": "f64"}
    manifest = {"format": "TNSR-container", "version": VERSION, "tensors": index}
    manifest["metadata"] = dict(metadata or {})
    (d / MANIFEST).write_text(_dump_json(manifest))
    return d


def load_container(directory: str | os.PathLike) -> tuple[dict[str, np.ndarray], dict]:
    d = Path(directory)
    manifest = json.loads((d / MANIFEST).read_text())
    tensors = {}
    for name, entry in manifest["tensors"].items():
        arr = load(d / entry["file"])
        if list(arr.shape) != entry["shape"]:
            raise TnsrError(f"{name}: manifest shape {entry['shape']} != file {arr.shape}")
        tensors[name] = arr
    return tensors, manifest.get("metadata", {})
