"""Named-tensor weight archive (`.wts`).

Layout: 8-byte magic, uint64 little-endian header length, JSON header,
contiguous little-endian tensor payloads. The header maps tensor name to
{dtype, shape, offset}; offsets are relative to the payload start. A `meta`
object carries free-form provenance (source checkpoint, conversion date,
checksums).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"FTSWTS01"

_DTYPES = {
    "float32": np.dtype("<f4"),
    "float64": np.dtype("<f8"),
    "int64": np.dtype("<i8"),
}


class WeightArchiveError(ValueError):
    """Raised on malformed archives; message includes the byte offset when known."""


@dataclass
class WeightArchive:
    tensors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __contains__(self, name):
        return name in self.tensors

    def __getitem__(self, name):
        return self.tensors[name]


def save_weight_archive(archive: WeightArchive, path) -> None:
    header = {"meta": archive.meta, "tensors": {}}
    payload_parts = []
    offset = 0
    for name, arr in archive.tensors.items():
        arr = np.ascontiguousarray(arr)
        dtype_name = arr.dtype.name
        if dtype_name not in _DTYPES:
            raise WeightArchiveError(f"unsupported dtype {dtype_name!r} for tensor {name!r}")
        raw = arr.astype(_DTYPES[dtype_name]).tobytes()
        header["tensors"][name] = {
            "dtype": dtype_name,
            "shape": list(arr.shape),
            "offset": offset,
        }
        payload_parts.append(raw)
        offset += len(raw)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for part in payload_parts:
            fh.write(part)


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise WeightArchiveError(f"duplicate tensor name {key!r} in header")
        seen[key] = value
    return seen


def load_weight_archive(path) -> WeightArchive:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise WeightArchiveError(f"bad magic at byte 0 (expected {MAGIC!r})")
    (header_len,) = struct.unpack_from("<Q", data, len(MAGIC))
    header_start = len(MAGIC) + 8
    payload_start = header_start + header_len
    if payload_start > len(data):
        raise WeightArchiveError(f"truncated header at byte {len(data)} (need {payload_start})")
    try:
        header = json.loads(
            data[header_start:payload_start].decode("utf-8"),
            object_pairs_hook=_reject_duplicate_keys,
        )
    except json.JSONDecodeError as exc:
        raise WeightArchiveError(f"invalid header JSON at byte {header_start + exc.pos}") from exc
    tensors = {}
    payload = data[payload_start:]
    for name, entry in header.get("tensors", {}).items():
        dtype_name = entry["dtype"]
        if dtype_name not in _DTYPES:
            raise WeightArchiveError(f"unknown dtype {dtype_name!r} for tensor {name!r}")
        dtype = _DTYPES[dtype_name]
        shape = tuple(entry["shape"])
        count = 1
        for s in shape:
            count *= s
        start = entry["offset"]
        end = start + count * dtype.itemsize
        if end > len(payload):
            raise WeightArchiveError(
                f"truncated payload for tensor {name!r} at byte {payload_start + len(payload)}"
                f" (need {payload_start + end})"
            )
        tensors[name] = np.frombuffer(payload[start:end], dtype=dtype).reshape(shape).copy()
    return WeightArchive(tensors=tensors, meta=header.get("meta", {}))
