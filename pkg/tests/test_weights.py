"""Weight archive format: round trips and malformed-file rejection."""

import struct

import numpy as np
import pytest

from ftseg.net_core import (
    WeightArchive,
    WeightArchiveError,
    load_weight_archive,
    save_weight_archive,
)


def test_single_tensor_roundtrip(tmp_path):
    arr = np.arange(32 * 3 * 3 * 3, dtype=np.float32).reshape(32, 3, 3, 3)
    path = tmp_path / "one.wts"
    save_weight_archive(WeightArchive({"enc.conv0.weight": arr}), path)
    loaded = load_weight_archive(path)
    assert list(loaded.tensors) == ["enc.conv0.weight"]
    assert loaded["enc.conv0.weight"].size == 864
    assert np.array_equal(loaded["enc.conv0.weight"], arr)


def test_roundtrip_bytes_identical(tmp_path):
    rng = np.random.default_rng(0)
    tensors = {
        "a.weight": rng.standard_normal((4, 7)).astype(np.float32),
        "b.bias": rng.standard_normal(11).astype(np.float64),
        "c.steps": np.arange(5),
    }
    path = tmp_path / "rt.wts"
    save_weight_archive(WeightArchive(tensors, meta={"note": "x"}), path)
    loaded = load_weight_archive(path)
    assert loaded.meta == {"note": "x"}
    for name, arr in tensors.items():
        assert loaded[name].tobytes() == arr.tobytes()
        assert loaded[name].dtype == arr.dtype


def test_duplicate_name_rejected(tmp_path):
    path = tmp_path / "dup.wts"
    header = (b'{"meta": {}, "tensors": {'
              b'"w": {"dtype": "float32", "shape": [1], "offset": 0}, '
              b'"w": {"dtype": "float32", "shape": [1], "offset": 4}}}')
    with open(path, "wb") as fh:
        fh.write(b"FTSWTS01" + struct.pack("<Q", len(header)) + header + b"\0" * 8)
    with pytest.raises(WeightArchiveError, match="duplicate"):
        load_weight_archive(path)


def test_truncated_payload_rejected(tmp_path):
    arr = np.ones((8, 8), dtype=np.float32)
    path = tmp_path / "trunc.wts"
    save_weight_archive(WeightArchive({"w": arr}), path)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(WeightArchiveError, match="truncated"):
        load_weight_archive(path)


def test_unknown_dtype_rejected(tmp_path):
    path = tmp_path / "dtype.wts"
    header = b'{"meta": {}, "tensors": {"w": {"dtype": "float16", "shape": [2], "offset": 0}}}'
    with open(path, "wb") as fh:
        fh.write(b"FTSWTS01" + struct.pack("<Q", len(header)) + header + b"\0" * 4)
    with pytest.raises(WeightArchiveError, match="unknown dtype"):
        load_weight_archive(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "magic.wts"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 16)
    with pytest.raises(WeightArchiveError, match="magic"):
        load_weight_archive(path)
