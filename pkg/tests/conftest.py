import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from advrobust import architectures
from advrobust.diffnet import Dense, Network


def affine_model(rng, d, n_classes):
    W = rng.standard_normal((d, n_classes))
    b = 0.1 * rng.standard_normal(n_classes)
    return Network([Dense(d, n_classes)], (d,), "classification", n_classes,
                   params={"0.W": W, "0.b": b})


def affine_boundary_distance(net, x):
    """Closed-form L2 distance from ``x`` to the nearest decision boundary."""
    W, b = net.params["0.W"], net.params["0.b"]
    z = x @ W + b
    y = int(np.argmax(z))
    return min(abs(z[k] - z[y]) / np.linalg.norm(W[:, k] - W[:, y])
               for k in range(len(z)) if k != y)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_cnn():
    return architectures.build("cnn", (16, 16, 1), 3, seed=5)


@pytest.fixture(scope="session")
def small_fcn():
    return architectures.build("fcn-skip", (16, 16, 1), 3, seed=2, width=4)


ROOT = Path(__file__).resolve().parents[1]
_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` logs one acceptance line and asserts ``ok``."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """Full pipeline on the shipped default config; returns (out_dir, seconds)."""
    from advrobust.harness import run_all, write_report

    out = tmp_path_factory.mktemp("default-run")
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        run_all(ROOT / "configs" / "default.toml", ROOT / "configs" / "data.toml", out)
    for fmt in ("csv", "json", "md"):
        write_report(out / "eval", fmt)
    return out, time.perf_counter() - t0
