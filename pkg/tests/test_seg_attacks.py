import numpy as np
import pytest

from advrobust.diffnet import grad_logit_input
from advrobust.seg_attacks import (
    DagConfig,
    DagTarget,
    EmptyTargetError,
    check_mse_band,
    dag_attack,
    dag_direction,
    dag_loss,
    target_type_a,
    target_type_b,
    target_type_c,
)


@pytest.fixture
def label_map():
    y = np.zeros((16, 16), dtype=int)
    y[3:7, 3:7] = 1
    y[9:14, 8:15] = 2
    return y


def test_type_a_targets_all_foreground(label_map):
    t = target_type_a(label_map)
    assert len(t.target_set) == int((label_map > 0).sum())
    assert np.all(t.y_adv == 0)
    assert t.kind == "A"


def test_type_b_fraction_and_distinct_classes(label_map):
    t = target_type_b(label_map, fraction=0.1, seed=3, n_classes=3)
    assert len(t.target_set) == 26  # ceil(0.1 * 256)
    r, c = t.target_set.T
    assert np.all(t.y_adv[r, c] != label_map[r, c])
    assert np.all((t.y_adv >= 0) & (t.y_adv < 3))
    assert np.array_equal(t.target_set, target_type_b(label_map, 0.1, seed=3, n_classes=3).target_set)


def test_type_c_grows_victim_ring(label_map):
    t = target_type_c(label_map, 1, radius=2)
    r, c = t.target_set.T
    assert np.all(label_map[r, c] != 1)
    assert np.all(t.y_adv[r, c] == 1)
    # ring of width 2 around the 4x4 square, clipped to nothing
    assert len(t.target_set) == 8 * 8 - 16
    with pytest.raises(ValueError, match="absent"):
        target_type_c(label_map, 3)


def test_validate_rejects_empty_and_identity(label_map):
    with pytest.raises(EmptyTargetError):
        target_type_a(np.zeros((4, 4), dtype=int))
    bad = DagTarget(label_map.copy(), np.array([[4, 4]]), "B")
    with pytest.raises(ValueError):
        bad.validate(label_map)


def test_direction_equals_gradient_sum(small_fcn, rng, label_map):
    x = rng.random((16, 16, 1))
    t = target_type_b(label_map, 0.02, seed=1, n_classes=3)
    active = t.target_set[:3]
    _, r = dag_direction(small_fcn, x, label_map, t.y_adv, active)
    ref = np.zeros_like(x)
    for i, j in active:
        g_adv = grad_logit_input(small_fcn, x, t.y_adv[i, j], (i, j))
        g_true = grad_logit_input(small_fcn, x, label_map[i, j], (i, j))
        ref += g_adv - g_true
    assert np.max(np.abs(r - ref)) < 1e-10


def test_dag_loss_example():
    z = np.zeros((2, 2, 3))
    z[0, 0] = [2.0, 1.0, 0.0]
    z[1, 1] = [0.0, 3.0, 0.5]
    y = np.array([[0, 0], [0, 1]])
    y_adv = np.array([[2, 0], [0, 2]])
    assert dag_loss(z, y, y_adv, [[0, 0], [1, 1]]) == pytest.approx((2 - 0) + (3 - 0.5))


def test_dag_attack_trace_and_box(small_fcn, rng, label_map):
    x = rng.random((16, 16, 1))
    t = target_type_a(label_map)
    res = dag_attack(small_fcn, x, label_map, t, DagConfig(max_iter=15, step=2 / 255))
    tr = res.info["trace"]
    assert tr.iteration == list(range(len(tr.iteration)))
    assert res.x_adv.min() >= 0 and res.x_adv.max() <= 1
    assert tr.active[0] >= tr.active[-1]
    assert res.linf <= 15 * 2 / 255 + 1e-12
    assert tr.mse[-1] == pytest.approx(res.mse)
    if res.success:
        assert tr.active[-1] == 0
    else:
        assert res.iterations == 15
    text = tr.to_csv(prefix={"index": 4})
    assert text.splitlines()[0] == "index,iteration,active,dag_loss,linf,mse"
    assert len(text.splitlines()) == len(tr.iteration) + 1


def test_spatial_mask_confines_perturbation(small_fcn, rng, label_map):
    x = rng.uniform(0.2, 0.8, (16, 16, 1))
    t = target_type_c(label_map, 2, radius=1)
    res = dag_attack(small_fcn, x, label_map, t, DagConfig(max_iter=5, spatial_mask=True))
    assert np.all(res.perturbation[~t.mask] == 0)


def test_mse_band_warning():
    assert check_mse_band("A", 0.004) is None
    with pytest.warns(UserWarning, match="type B"):
        assert check_mse_band("B", 0.01) is not None
