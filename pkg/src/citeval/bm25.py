"""Okapi BM25 scoring over an inverted index.

The score of a document for a query sums, per query token occurrence,
an IDF factor ``ln((N - df + 0.5) / (df + 0.5))`` times a saturated,
length-normalized term frequency ``tf*(k1+1) / (tf + k1*(1-b+b*ld/L))``.
Query tokens are treated as a multiset: a token appearing twice in the
query contributes twice. Negative IDF contributions are kept unless the
caller floors them at zero.

Candidates are held sorted by id, so a stable descending sort on scores
yields the package-wide tie rule: (-score, paragraph id ascending).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Paragraph, ParagraphId
from .errors import ValidationError
from .tokens import tokenize


@dataclass
class Bm25Index:
    doc_ids: list[ParagraphId]          # sorted ascending; positions are doc indexes
    doc_len: np.ndarray                 # int64, tokens per doc
    avg_len: float
    postings: dict[str, tuple[np.ndarray, np.ndarray]]  # term -> (doc idx, tf)
    k1: float = 1.2
    b: float = 0.75
    tokenizer_id: str = ""

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValidationError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValidationError(f"b must be in [0, 1], got {self.b}")
        self._index_of = {pid: i for i, pid in enumerate(self.doc_ids)}
        # k1 * (1 - b + b * ld / L), the per-document saturation denominator;
        # an all-empty corpus (L = 0) degenerates to the unnormalized form
        rel_len = self.doc_len / self.avg_len if self.avg_len > 0 else np.zeros(len(self.doc_ids))
        self._norm = self.k1 * (1.0 - self.b + self.b * rel_len)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def df(self, term: str) -> int:
        entry = self.postings.get(term)
        return len(entry[0]) if entry is not None else 0

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log((self.n_docs - df + 0.5) / (df + 0.5))

    def index_of(self, doc: ParagraphId) -> int:
        try:
            return self._index_of[doc]
        except KeyError:
            raise ValidationError(f"document {doc} is not in the index") from None


def build_bm25_index(
    candidates: Iterable[Paragraph],
    tokenizer=tokenize,
    k1: float = 1.2,
    b: float = 0.75,
) -> Bm25Index:
    """Index the candidate paragraphs; statistics equal brute-force counts."""
    docs = sorted(candidates, key=lambda p: p.id)
    if not docs:
        raise ValidationError("cannot build a BM25 index over an empty candidate set")
    doc_len = np.zeros(len(docs), dtype=np.int64)
    raw: dict[str, tuple[list[int], list[int]]] = {}
    for i, para in enumerate(docs):
        counts = Counter(tokenizer(para.text))
        doc_len[i] = sum(counts.values())
        for term, tf in counts.items():
            entry = raw.setdefault(term, ([], []))
            entry[0].append(i)
            entry[1].append(tf)
    postings = {
        term: (np.asarray(idx, dtype=np.int32), np.asarray(tf, dtype=np.int32))
        for term, (idx, tf) in raw.items()
    }
    return Bm25Index(
        doc_ids=[p.id for p in docs],
        doc_len=doc_len,
        avg_len=int(doc_len.sum()) / len(docs),
        postings=postings,
        k1=k1,
        b=b,
    )


def bm25_score(
    index: Bm25Index,
    query: Sequence[str],
    doc: ParagraphId,
    idf_floor0: bool = False,
) -> float:
    """Score one document for a tokenized query (absent terms add 0)."""
    i = index.index_of(doc)
    norm = float(index._norm[i])
    score = 0.0
    for term in query:
        entry = index.postings.get(term)
        if entry is None:
            continue
        pos = np.searchsorted(entry[0], i)
        if pos == len(entry[0]) or entry[0][pos] != i:
            continue
        idf = index.idf(term)
        if idf_floor0 and idf < 0.0:
            continue
        tf = float(entry[1][pos])
        score += idf * tf * (index.k1 + 1.0) / (tf + norm)
    return score


def bm25_score_all(index: Bm25Index, query: Sequence[str], idf_floor0: bool = False) -> np.ndarray:
    """Scores for every indexed document, aligned with ``index.doc_ids``.

    Vectorized over postings lists; query terms are visited in order of
    first appearance with their multiplicities, so results are
    deterministic and independent of any outer parallelism.
    """
    scores = np.zeros(index.n_docs, dtype=np.float64)
    for term, count in Counter(query).items():
        entry = index.postings.get(term)
        if entry is None:
            continue
        idf = index.idf(term)
        if idf_floor0 and idf < 0.0:
            continue
        docs, tfs = entry
        tf = tfs.astype(np.float64)
        scores[docs] += (count * idf * (index.k1 + 1.0)) * tf / (tf + index._norm[docs])
    return scores


def rank_scores(scores: np.ndarray, k: int | None = None) -> np.ndarray:
    """Doc indexes ordered by (-score, position). Positions must already
    follow the ascending-id order, which build_bm25_index guarantees."""
    order = np.argsort(-scores, kind="stable")
    return order if k is None else order[:k]


def bm25_top_k(
    index: Bm25Index,
    query: Sequence[str],
    k: int,
    idf_floor0: bool = False,
) -> list[tuple[ParagraphId, float]]:
    """Top-k candidates by BM25 score with the global tie rule.

    No positivity floor: zero- and negative-scored candidates may appear.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    scores = bm25_score_all(index, query, idf_floor0=idf_floor0)
    order = rank_scores(scores, k)
    return [(index.doc_ids[i], float(scores[i])) for i in order]
