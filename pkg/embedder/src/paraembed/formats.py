"""Canonical embedding file formats, append-oriented.

Two formats, identical to what the retrieval engine consumes:

* NDJSON: one ``{"id": str, "vector": [..]}`` object per line;
* packed binary: magic ``EMB1``, little-endian u32 dimension, then per
  record a u32 id byte-length, the UTF-8 id, and dim little-endian f32s.

Writers append one record at a time through a single appender, so an
interrupted run leaves at most one damaged trailing record; ``resume``
scans what exists, truncates a partial binary tail, and reports the ids
already present.
"""
from __future__ import annotations

import json
import os
import struct
from typing import IO

import numpy as np

MAGIC = b"EMB1"


class FormatError(ValueError):
    pass


class NdjsonAppender:
    def __init__(self, path: str, dim: int):
        self.path = path
        self.dim = dim
        self._fh: IO[str] = open(path, "a", encoding="utf-8")

    def append(self, record_id: str, vector: np.ndarray) -> None:
        arr = np.asarray(vector, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise FormatError(
                f"vector for {record_id} has dimension {arr.shape}, run produces {self.dim}"
            )
        values = [float(v) for v in arr]
        self._fh.write(json.dumps({"id": record_id, "vector": values}) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


class PackedAppender:
    def __init__(self, path: str, dim: int):
        self.path = path
        self.dim = dim
        fresh = not os.path.exists(path) or os.path.getsize(path) == 0
        self._fh: IO[bytes] = open(path, "ab")
        if fresh:
            self._fh.write(MAGIC)
            self._fh.write(struct.pack("<I", dim))
            self._fh.flush()

    def append(self, record_id: str, vector: np.ndarray) -> None:
        arr = np.asarray(vector, dtype="<f4")
        if arr.shape != (self.dim,):
            raise FormatError(
                f"vector for {record_id} has dimension {arr.shape}, run produces {self.dim}"
            )
        payload = record_id.encode("utf-8")
        self._fh.write(struct.pack("<I", len(payload)))
        self._fh.write(payload)
        self._fh.write(arr.tobytes())
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def open_appender(path: str, fmt: str, dim: int):
    if fmt == "ndjson":
        return NdjsonAppender(path, dim)
    if fmt == "packed":
        return PackedAppender(path, dim)
    raise FormatError(f"unknown format {fmt!r}")


def scan_ndjson(path: str) -> tuple[set[str], int | None]:
    """Existing ids and dimension; tolerates a torn trailing line."""
    ids: set[str] = set()
    dim: int | None = None
    if not os.path.exists(path):
        return ids, dim
    keep = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.endswith("\n"):
                break  # torn tail from an interrupted write
            if not line.strip():
                keep += len(line)
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                break
            vector = record.get("vector", [])
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise FormatError(f"{path}: existing records disagree on dimension")
            ids.add(str(record["id"]))
            keep += len(line.encode("utf-8"))
    size = os.path.getsize(path)
    if keep < size:
        with open(path, "r+b") as fh:
            fh.truncate(keep)
    return ids, dim


def scan_packed(path: str) -> tuple[set[str], int | None]:
    """Existing ids and header dimension; truncates a partial tail record."""
    ids: set[str] = set()
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return ids, None
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FormatError(f"{path}: not an EMB1 file (magic {magic!r})")
        header = fh.read(4)
        if len(header) != 4:
            raise FormatError(f"{path}: truncated header")
        (dim,) = struct.unpack("<I", header)
        good = 8
        while True:
            raw = fh.read(4)
            if not raw:
                break
            if len(raw) != 4:
                break
            (id_len,) = struct.unpack("<I", raw)
            id_bytes = fh.read(id_len)
            payload = fh.read(4 * dim)
            if len(id_bytes) != id_len or len(payload) != 4 * dim:
                break  # torn tail record
            ids.add(id_bytes.decode("utf-8"))
            good += 4 + id_len + 4 * dim
    if good < os.path.getsize(path):
        with open(path, "r+b") as fh:
            fh.truncate(good)
    return ids, dim


def scan_existing(path: str, fmt: str) -> tuple[set[str], int | None]:
    return scan_ndjson(path) if fmt == "ndjson" else scan_packed(path)
