"""On-disk index snapshots: versioned magic LSBX1, little-endian layout.

One container serves both index kinds. Loading a snapshot reconstructs
the exact integer statistics the index was built from, so scores after
a load are identical to scores after a rebuild.
"""
from __future__ import annotations

import json
import struct
from typing import IO

import numpy as np
from scipy import sparse

from .bm25 import Bm25Index
from .corpus import ParagraphId
from .errors import ValidationError
from .tfidf import NGramVocab, TfidfIndex

MAGIC = b"LSBX1"
_KIND_BM25 = 1
_KIND_TFIDF = 2


def _write_bytes(out: IO[bytes], payload: bytes) -> None:
    out.write(struct.pack("<Q", len(payload)))
    out.write(payload)


def _read_bytes(fh: IO[bytes], what: str) -> bytes:
    raw = fh.read(8)
    if len(raw) != 8:
        raise ValidationError(f"snapshot truncated reading {what} length")
    (length,) = struct.unpack("<Q", raw)
    payload = fh.read(length)
    if len(payload) != length:
        raise ValidationError(f"snapshot truncated reading {what}")
    return payload


def _write_str_list(out: IO[bytes], items: list[str]) -> None:
    blob = b"".join(s.encode("utf-8") + b"\x00" for s in items)
    out.write(struct.pack("<I", len(items)))
    _write_bytes(out, blob)


def _read_str_list(fh: IO[bytes], what: str) -> list[str]:
    raw = fh.read(4)
    if len(raw) != 4:
        raise ValidationError(f"snapshot truncated reading {what} count")
    (count,) = struct.unpack("<I", raw)
    blob = _read_bytes(fh, what)
    items = blob.decode("utf-8").split("\x00")
    if items and items[-1] == "":
        items.pop()
    if len(items) != count:
        raise ValidationError(f"snapshot {what}: expected {count} items, found {len(items)}")
    return items


def _write_array(out: IO[bytes], arr: np.ndarray, dtype: str) -> None:
    _write_bytes(out, np.ascontiguousarray(arr, dtype=dtype).tobytes())


def _read_array(fh: IO[bytes], dtype: str, what: str) -> np.ndarray:
    return np.frombuffer(_read_bytes(fh, what), dtype=dtype)


def save_bm25(index: Bm25Index, out: IO[bytes], tokenizer_id: str = "") -> None:
    out.write(MAGIC)
    out.write(struct.pack("<B", _KIND_BM25))
    header = {
        "kind": "bm25",
        "k1": index.k1,
        "b": index.b,
        "n_docs": index.n_docs,
        "avg_len": index.avg_len,
        "tokenizer": tokenizer_id or index.tokenizer_id,
    }
    _write_bytes(out, json.dumps(header, sort_keys=True).encode("utf-8"))
    _write_str_list(out, [str(pid) for pid in index.doc_ids])
    _write_array(out, index.doc_len, "<i8")
    terms = list(index.postings)
    _write_str_list(out, terms)
    for term in terms:
        docs, tfs = index.postings[term]
        _write_array(out, docs, "<i4")
        _write_array(out, tfs, "<i4")


def save_tfidf(index: TfidfIndex, out: IO[bytes], tokenizer_id: str = "") -> None:
    vocab = index.vocab
    out.write(MAGIC)
    out.write(struct.pack("<B", _KIND_TFIDF))
    header = {
        "kind": "tfidf",
        "n": vocab.n,
        "k": vocab.k,
        "n_train_docs": vocab.n_train_docs,
        "n_docs": index.n_docs,
        "tokenizer": tokenizer_id or index.tokenizer_id,
    }
    _write_bytes(out, json.dumps(header, sort_keys=True).encode("utf-8"))
    _write_str_list(out, [str(pid) for pid in index.doc_ids])
    _write_str_list(out, [" ".join(gram) for gram in vocab.entries])
    _write_array(out, np.array([vocab.freq[g] for g in vocab.entries]), "<i8")
    _write_array(out, np.array([vocab.df[g] for g in vocab.entries]), "<i8")
    counts = index.raw_counts()
    _write_array(out, counts.indptr, "<i8")
    _write_array(out, counts.indices, "<i4")
    _write_array(out, counts.data, "<i4")


def load_index(fh: IO[bytes]):
    """Load either index kind; returns (index, header dict)."""
    magic = fh.read(len(MAGIC))
    if magic != MAGIC:
        raise ValidationError(f"not an index snapshot: magic {magic!r}")
    raw = fh.read(1)
    if len(raw) != 1:
        raise ValidationError("snapshot truncated reading kind")
    (kind,) = struct.unpack("<B", raw)
    header = json.loads(_read_bytes(fh, "header").decode("utf-8"))
    doc_ids = [ParagraphId.parse(s) for s in _read_str_list(fh, "doc ids")]

    if kind == _KIND_BM25:
        doc_len = _read_array(fh, "<i8", "doc lengths").copy()
        terms = _read_str_list(fh, "terms")
        postings = {}
        for term in terms:
            docs = _read_array(fh, "<i4", f"postings for {term!r}")
            tfs = _read_array(fh, "<i4", f"tfs for {term!r}")
            if len(docs) != len(tfs):
                raise ValidationError(f"snapshot postings for {term!r} are inconsistent")
            postings[term] = (docs, tfs)
        index = Bm25Index(
            doc_ids=doc_ids,
            doc_len=doc_len,
            avg_len=float(header["avg_len"]),
            postings=postings,
            k1=float(header["k1"]),
            b=float(header["b"]),
            tokenizer_id=str(header.get("tokenizer", "")),
        )
        return index, header

    if kind == _KIND_TFIDF:
        grams = [tuple(s.split(" ")) for s in _read_str_list(fh, "vocab")]
        freq = _read_array(fh, "<i8", "frequencies")
        df = _read_array(fh, "<i8", "document frequencies")
        if not (len(grams) == len(freq) == len(df)):
            raise ValidationError("snapshot vocabulary arrays are inconsistent")
        vocab = NGramVocab(
            n=int(header["n"]),
            entries=grams,
            freq={g: int(f) for g, f in zip(grams, freq)},
            df={g: int(d) for g, d in zip(grams, df)},
            n_train_docs=int(header["n_train_docs"]),
            k=int(header["k"]),
        )
        indptr = _read_array(fh, "<i8", "indptr")
        indices = _read_array(fh, "<i4", "indices")
        data = _read_array(fh, "<i4", "counts")
        counts = sparse.csr_matrix(
            (data.astype(np.float64), indices.copy(), indptr.copy()),
            shape=(len(doc_ids), len(grams)),
        )
        index = TfidfIndex.from_counts(vocab, doc_ids, counts)
        index.tokenizer_id = str(header.get("tokenizer", ""))
        return index, header

    raise ValidationError(f"unknown snapshot kind {kind}")
