import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from advrobust import tnsr


def test_header_layout_is_bit_exact():
    buf = tnsr.encode(np.array([[1.0, 2.0, 3.0]]), "f32")
    assert buf[:4] == b"TNSR"
    assert buf[4:7] == bytes([1, 1, 2])
    assert struct.unpack("<2I", buf[7:15]) == (1, 3)
    assert buf[15:] == np.array([1, 2, 3], dtype="<f4").tobytes()


def test_f64_payload_little_endian():
    buf = tnsr.encode(np.array([0.5]), "f64")
    assert buf[5] == 2 and buf[6] == 1
    assert buf[-8:] == struct.pack("<d", 0.5)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, array_shapes(min_dims=0, max_dims=4, max_side=5),
              elements=st.floats(allow_nan=False, width=64)))
def test_roundtrip_f64_exact(a):
    b = tnsr.decode(tnsr.encode(a))
    assert b.shape == a.shape
    assert b.tobytes() == np.asarray(a, order="C").tobytes()


def test_roundtrip_f32_rounds_once():
    a = np.array([0.1, 1 / 3])
    assert np.array_equal(tnsr.decode(tnsr.encode(a, "f32")), a.astype(np.float32).astype(np.float64))


def test_zero_size_tensor():
    a = np.zeros((0, 3))
    assert tnsr.decode(tnsr.encode(a)).shape == (0, 3)


@pytest.mark.parametrize("mutate, msg", [
    (lambda b: b"XXXX" + b[4:], "magic"),
    (lambda b: b[:4] + b"\x02" + b[5:], "version"),
    (lambda b: b[:5] + b"\x07" + b[6:], "dtype"),
    (lambda b: b[:-1], "payload"),
    (lambda b: b[:8], "truncated"),
])
def test_malformed_rejected(mutate, msg):
    buf = tnsr.encode(np.ones((2, 2)))
    with pytest.raises(tnsr.TnsrError, match=msg):
        tnsr.decode(mutate(buf))


def test_container_roundtrip(tmp_path):
    tensors = {"w": np.arange(6.0).reshape(2, 3), "b": np.zeros(3)}
    tnsr.save_container(tmp_path / "c", tensors, {"note": "hi"})
    got, meta = tnsr.load_container(tmp_path / "c")
    assert meta == {"note": "hi"}
    assert set(got) == {"w", "b"}
    assert np.array_equal(got["w"], tensors["w"])
    assert (tmp_path / "c" / "manifest.json").read_text().startswith("{")
