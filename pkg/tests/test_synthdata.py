import numpy as np
import pytest

from advrobust.synthdata import DatasetSpec, generate, load_dataset, save_dataset


@pytest.fixture(scope="module")
def cls_data():
    return generate(DatasetSpec("classification", n_samples=90, seed=4))


@pytest.fixture(scope="module")
def seg_data():
    return generate(DatasetSpec("segmentation", n_samples=20, per_patient=2, seed=4))


def test_classification_shapes_and_balance(cls_data):
    assert cls_data.images.shape == (90, 16, 16, 1)
    assert np.bincount(cls_data.labels).tolist() == [30, 30, 30]
    assert cls_data.images.min() >= 0 and cls_data.images.max() <= 1
    _, ytr = cls_data.split("train")
    assert len(np.unique(ytr)) == 3


@pytest.mark.parametrize("fixture", ["cls_data", "seg_data"])
def test_split_is_patient_disjoint(fixture, request):
    ds = request.getfixturevalue(fixture)
    assert set(ds.groups[ds.train_idx]).isdisjoint(ds.groups[ds.test_idx])
    assert len(ds.train_idx) + len(ds.test_idx) == len(ds.images)


def test_segmentation_labels(seg_data):
    assert seg_data.images.shape == (20, 32, 32, 1)
    assert seg_data.labels.shape == (20, 32, 32)
    assert seg_data.n_classes == 5
    assert set(np.unique(seg_data.labels)) == set(range(5))


def test_generation_is_deterministic():
    a = generate(DatasetSpec("segmentation", n_samples=6, seed=9))
    b = generate(DatasetSpec("segmentation", n_samples=6, seed=9))
    c = generate(DatasetSpec("segmentation", n_samples=6, seed=10))
    assert np.array_equal(a.images, b.images) and np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.images, c.images)


def test_save_load_roundtrip(tmp_path, cls_data):
    save_dataset(cls_data, tmp_path / "d")
    back = load_dataset(tmp_path / "d")
    assert np.array_equal(back.images, cls_data.images)
    assert np.array_equal(back.labels, cls_data.labels)
    assert np.array_equal(back.test_idx, cls_data.test_idx)
    assert back.spec == cls_data.spec


def test_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpec("detection")
