"""Experiment configuration loaded from TOML.

Every table maps onto a dataclass below; unknown keys raise
:class:`ConfigError`. ``docs/config.md`` lists the schema with defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import zlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from ..synthdata import DatasetSpec


class ConfigError(ValueError):
    pass


@dataclass
class ZooConfig:
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    classification: list[str] = field(default_factory=lambda: ["mlp", "cnn"])
    segmentation: list[str] = field(default_factory=lambda: ["fcn-plain", "fcn-skip", "fcn-dense"])
    width: int = 8


@dataclass
class TrainSection:
    optimizer: str = "sgd"
    lr: float = 0.01
    momentum: float = 0.9
    lr_decay: float = 0.95
    epochs: int = 40
    batch_size: int = 16
    class_weights: Any = "balanced"  # "balanced", "uniform" or explicit list
    dice_weight: float = 0.0
    weight_decay: float = 0.0
    augment: bool = True
    min_score: float = 0.0


def _seg_train():
    return TrainSection(optimizer="adam", lr=0.001, lr_decay=0.98, epochs=60, batch_size=8,
                        dice_weight=0.5, min_score=0.5)


@dataclass
class TrainTables:
    classification: TrainSection = field(
        default_factory=lambda: TrainSection(epochs=40, weight_decay=1e-4, min_score=0.6))
    segmentation: TrainSection = field(default_factory=_seg_train)


@dataclass
class DeepFoolSection:
    max_iter: int = 50
    overshoot: float = 0.02


@dataclass
class SmaSection:
    theta: float = 0.2
    max_fraction: float = 0.10
    pairs: bool = False


@dataclass
class DagSection:
    max_iter: int = 200
    step: float = 1 / 255
    type_b_fraction: float = 0.05
    type_c_radius: int = 2
    spatial_mask: bool = False


@dataclass
class AttackTables:
    classification: list[str] = field(default_factory=lambda: ["fgsm", "deepfool", "sma"])
    segmentation: list[str] = field(default_factory=lambda: ["dag-a", "dag-b", "dag-c"])
    ssim_band: list[float] = field(default_factory=lambda: [0.97, 0.99])
    deepfool: DeepFoolSection = field(default_factory=DeepFoolSection)
    sma: SmaSection = field(default_factory=SmaSection)
    dag: DagSection = field(default_factory=DagSection)


@dataclass
class NoiseSection:
    classification: str = "gaussian"
    segmentation: str = "rician"
    tol: float = 0.005
    n_seeds: int = 5


@dataclass
class EvalSection:
    roc_class: int = 0
    embeddings: bool = True


@dataclass
class Config:
    seed: int = 0
    threads: int = 1
    zoo: ZooConfig = field(default_factory=ZooConfig)
    train: TrainTables = field(default_factory=TrainTables)
    attacks: AttackTables = field(default_factory=AttackTables)
    noise: NoiseSection = field(default_factory=NoiseSection)
    eval: EvalSection = field(default_factory=EvalSection)


CLS_ATTACKS = ("fgsm", "deepfool", "sma")
SEG_ATTACKS = ("dag-a", "dag-b", "dag-c")


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{path or 'root'}]: {', '.join(unknown)}")
    base = cls()
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            continue
        current = getattr(base, name)
        sub = f"{path}.{name}" if path else name
        if dataclasses.is_dataclass(current):
            kwargs[name] = _build(type(current), data[name], sub)
        else:
            kwargs[name] = data[name]
    return dataclasses.replace(base, **kwargs)


def _validate(cfg: Config) -> None:
    for a in cfg.attacks.classification:
        if a not in CLS_ATTACKS:
            raise ConfigError(f"unknown classification attack {a!r}")
    for a in cfg.attacks.segmentation:
        if a not in SEG_ATTACKS:
            raise ConfigError(f"unknown segmentation attack {a!r}")
    lo, hi = cfg.attacks.ssim_band
    if not 0 < lo < hi < 1:
        raise ConfigError("ssim_band must satisfy 0 < lo < hi < 1")
    if len(set(cfg.zoo.seeds)) < 2:
        raise ConfigError("zoo needs at least 2 seeds per architecture for black-box cells")
    for kind in (cfg.noise.classification, cfg.noise.segmentation):
        if kind not in ("gaussian", "rician"):
            raise ConfigError(f"unknown noise kind {kind!r}")


def parse_config(text: str) -> Config:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from None
    cfg = _build(Config, data, "")
    _validate(cfg)
    return cfg


def load_config(path) -> Config:
    return parse_config(Path(path).read_text())


def parse_dataset_specs(text: str) -> dict[str, DatasetSpec]:
    """Data-spec file: optional ``[classification]`` / ``[segmentation]`` tables."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from None
    unknown = sorted(set(data) - {"classification", "segmentation"})
    if unknown:
        raise ConfigError(f"unknown key(s) in data spec: {', '.join(unknown)}")
    known = {f.name for f in fields(DatasetSpec)} - {"task"}
    out = {}
    for task in ("classification", "segmentation"):
        table = data.get(task, {})
        bad = sorted(set(table) - known)
        if bad:
            raise ConfigError(f"unknown key(s) in [{task}]: {', '.join(bad)}")
        defaults = {"n_samples": 300} if task == "classification" else {"n_samples": 60, "per_patient": 3}
        out[task] = DatasetSpec(task=task, **{**defaults, **table})
    return out


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def derive_seed(master: int, *keys) -> int:
    """Independent 63-bit seed for a task identified by ``keys``."""
    words = [int(master) & 0xFFFFFFFF, (int(master) >> 32) & 0xFFFFFFFF]
    for k in keys:
        words.append(zlib.crc32(str(k).encode()) if not isinstance(k, int) else int(k) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(words).generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> 1)
