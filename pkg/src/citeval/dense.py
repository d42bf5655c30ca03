"""Embedding stores and exact cosine-similarity ranking.

Embeddings are produced elsewhere and consumed from files in one of two
canonical formats that round-trip bit-exactly at 32-bit precision:

* NDJSON: one ``{"id": str, "vector": [..]}`` object per line.
* Packed binary: magic ``EMB1``, little-endian u32 dimension, then per
  record a u32 id byte length, the UTF-8 id bytes, and ``dim`` 32-bit
  little-endian IEEE-754 floats.

Ranking is exhaustive: every candidate is scored with double-precision
dot products regardless of the storage precision, then ordered by
(-score, paragraph id).
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

from .corpus import ParagraphId
from .errors import ValidationError

_MAGIC = b"EMB1"


@dataclass
class EmbeddingStore:
    dim: int
    ids: list[str]                  # file order
    matrix: np.ndarray              # float32, len(ids) x dim
    model_tag: str = ""

    def __post_init__(self) -> None:
        self._row_of = {pid: i for i, pid in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, pid: str) -> bool:
        return pid in self._row_of

    def vector(self, pid: str) -> np.ndarray:
        try:
            return self.matrix[self._row_of[pid]]
        except KeyError:
            raise ValidationError(f"no embedding for id {pid}") from None

    def row_of(self, pid: str) -> int:
        try:
            return self._row_of[pid]
        except KeyError:
            raise ValidationError(f"no embedding for id {pid}") from None


def _validate_record(
    index: int, pid: str, vec: list | np.ndarray, dim: int | None, seen: set[str]
) -> int:
    if dim is None:
        dim = len(vec)
        if dim == 0:
            raise ValidationError(f"record {index}: empty vector")
    elif len(vec) != dim:
        raise ValidationError(
            f"record {index}: dimension {len(vec)} does not match established dimension {dim}"
        )
    if pid in seen:
        raise ValidationError(f"record {index}: duplicate id {pid}")
    seen.add(pid)
    ParagraphId.parse(pid)  # ids must be paragraph ids; defines the tie order
    return dim


def read_embeddings(path: str, model_tag: str | None = None) -> EmbeddingStore:
    """Load either canonical format, validating dimensions and finiteness.

    The dimension is taken from the first record (or the binary header)
    and enforced on all records; the failing record index is reported.
    """
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == _MAGIC:
        records = _read_packed(path)
    elif head[:1] in (b"{", b"") or head.lstrip()[:1] == b"{":
        records = _read_ndjson(path)
    else:
        raise ValidationError(f"{path}: unknown format magic {head!r}")

    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim: int | None = None
    for index, (pid, vec) in enumerate(records, start=1):
        dim = _validate_record(index, pid, vec, dim, seen)
        if not np.all(np.isfinite(vec)):
            raise ValidationError(f"record {index}: non-finite value in vector for {pid}")
        ids.append(pid)
        rows.append(vec)
    if dim is None:
        raise ValidationError(f"{path}: no embedding records")
    matrix = np.vstack(rows).astype(np.float32)
    if model_tag is None:
        model_tag = _sidecar_model_tag(path)
    return EmbeddingStore(dim=dim, ids=ids, matrix=matrix, model_tag=model_tag)


def _sidecar_model_tag(path: str) -> str:
    import os

    sidecar = path + ".manifest.json"
    if os.path.exists(sidecar):
        try:
            with open(sidecar, "r", encoding="utf-8") as fh:
                tag = json.load(fh).get("model_tag")
            if isinstance(tag, str):
                return tag
        except (OSError, json.JSONDecodeError):
            pass
    base = os.path.basename(path)
    return base.rsplit(".", 1)[0] if "." in base else base


def _read_ndjson(path: str) -> Iterator[tuple[str, np.ndarray]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "id" not in rec or "vector" not in rec:
                raise ValidationError(f"{path}:{lineno}: record needs 'id' and 'vector'")
            vec = np.asarray(rec["vector"], dtype=np.float64)
            if vec.ndim != 1:
                raise ValidationError(f"{path}:{lineno}: 'vector' must be a flat list")
            yield str(rec["id"]), vec.astype(np.float32)


def _read_packed(path: str) -> Iterator[tuple[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValidationError(f"{path}: unknown format magic {magic!r}")
        raw = fh.read(4)
        if len(raw) != 4:
            raise ValidationError(f"{path}: truncated header")
        (dim,) = struct.unpack("<I", raw)
        if dim == 0:
            raise ValidationError(f"{path}: header dimension is 0")
        index = 0
        while True:
            raw = fh.read(4)
            if not raw:
                return
            index += 1
            if len(raw) != 4:
                raise ValidationError(f"{path}: record {index}: truncated id length")
            (id_len,) = struct.unpack("<I", raw)
            id_bytes = fh.read(id_len)
            if len(id_bytes) != id_len:
                raise ValidationError(f"{path}: record {index}: truncated id")
            payload = fh.read(4 * dim)
            if len(payload) != 4 * dim:
                raise ValidationError(f"{path}: record {index}: truncated vector")
            vec = np.frombuffer(payload, dtype="<f4").astype(np.float32)
            yield id_bytes.decode("utf-8"), vec


def write_ndjson(records: Iterable[tuple[str, np.ndarray]], out: IO[str]) -> None:
    """Write NDJSON records; float32 values survive a parse round trip."""
    for pid, vec in records:
        vals = [float(v) for v in np.asarray(vec, dtype=np.float32)]
        out.write(json.dumps({"id": pid, "vector": vals}) + "\n")


def write_packed(records: Iterable[tuple[str, np.ndarray]], out: IO[bytes], dim: int) -> None:
    out.write(_MAGIC)
    out.write(struct.pack("<I", dim))
    for pid, vec in records:
        arr = np.asarray(vec, dtype="<f4")
        if arr.shape != (dim,):
            raise ValidationError(f"vector for {pid} has shape {arr.shape}, expected ({dim},)")
        id_bytes = pid.encode("utf-8")
        out.write(struct.pack("<I", len(id_bytes)))
        out.write(id_bytes)
        out.write(arr.tobytes())


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|) in double precision; 0 when either norm is 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    un = np.linalg.norm(u)
    vn = np.linalg.norm(v)
    if un == 0.0 or vn == 0.0:
        return 0.0
    return float(np.dot(u, v) / (un * vn))


class DenseRanker:
    """Cosine ranking of a fixed candidate set out of an EmbeddingStore."""

    def __init__(self, store: EmbeddingStore, candidates: Iterable[str] | None = None):
        self.store = store
        ids = list(candidates) if candidates is not None else list(store.ids)
        if len(set(ids)) != len(ids):
            raise ValidationError("candidate ids contain duplicates")
        missing = [pid for pid in ids if pid not in store]
        if missing:
            raise ValidationError(
                "candidates without embeddings: " + ", ".join(sorted(missing)[:10])
                + (f" (+{len(missing) - 10} more)" if len(missing) > 10 else "")
            )
        self.doc_ids = sorted(ids, key=ParagraphId.parse)
        rows = np.array([store.row_of(pid) for pid in self.doc_ids], dtype=np.intp)
        self._matrix = store.matrix[rows].astype(np.float64)
        self._norms = np.linalg.norm(self._matrix, axis=1)

    def score_all(self, query_vec: np.ndarray) -> np.ndarray:
        q = np.asarray(query_vec, dtype=np.float64)
        if q.shape != (self.store.dim,):
            raise ValidationError(f"query vector has shape {q.shape}, expected ({self.store.dim},)")
        qn = np.linalg.norm(q)
        if qn == 0.0:
            return np.zeros(len(self.doc_ids), dtype=np.float64)
        dots = self._matrix @ q
        denom = self._norms * qn
        return np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)

    def top_k(self, query_vec: np.ndarray, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        scores = self.score_all(query_vec)
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.doc_ids[i], float(scores[i])) for i in order]


def dense_top_k(
    store: EmbeddingStore,
    query_id: str,
    candidates: Iterable[str],
    k: int,
    query_store: EmbeddingStore | None = None,
) -> list[tuple[str, float]]:
    """Exhaustive top-k candidates by cosine to the query's embedding.

    ``query_store`` lets query vectors live in a separate file from the
    candidate pool; it defaults to ``store``.
    """
    source = query_store if query_store is not None else store
    query_vec = source.vector(query_id)
    return DenseRanker(store, candidates).top_k(query_vec, k)
