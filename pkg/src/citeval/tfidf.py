"""TF-IDF n-gram vectors over a top-K training vocabulary, cosine-scored.

Texts are represented on the K most frequent n-grams of the training
paragraphs (total occurrence count, ties broken lexicographically).
Weights are raw n-gram count times a smoothed inverse document
frequency, ``ln((1 + N_train) / (1 + df)) + 1``, and similarity is the
cosine between the two sparse vectors (0 whenever either norm is 0).
The weighting convention is recorded in run metadata.
"""
from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .corpus import Paragraph, ParagraphId
from .errors import ValidationError
from .tokens import ngrams, tokenize

WEIGHTING_ID = "count*smooth-idf, cosine"


@dataclass
class NGramVocab:
    n: int
    entries: list[tuple[str, ...]]       # top-K by (freq desc, gram asc)
    freq: dict[tuple[str, ...], int]     # total training occurrences
    df: dict[tuple[str, ...], int]       # training document frequency
    n_train_docs: int
    k: int = 5000

    def __post_init__(self) -> None:
        self._index = {g: i for i, g in enumerate(self.entries)}
        self._idf = np.array(
            [math.log((1 + self.n_train_docs) / (1 + self.df[g])) + 1.0 for g in self.entries],
            dtype=np.float64,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, gram: tuple[str, ...]) -> int | None:
        return self._index.get(gram)

    def idf(self, gram: tuple[str, ...]) -> float:
        i = self._index.get(gram)
        return float(self._idf[i]) if i is not None else 0.0


def build_tfidf_vocab(
    train_paragraphs: Iterable[Paragraph],
    n: int,
    k: int = 5000,
    tokenizer=tokenize,
) -> NGramVocab:
    """Top-``k`` n-grams of the training set by total occurrence count."""
    if n < 1:
        raise ValidationError(f"n-gram size must be >= 1, got {n}")
    if k < 1:
        raise ValidationError(f"vocabulary size must be >= 1, got {k}")
    freq: Counter[tuple[str, ...]] = Counter()
    df: Counter[tuple[str, ...]] = Counter()
    n_docs = 0
    for para in train_paragraphs:
        n_docs += 1
        grams = ngrams(tokenizer(para.text), n)
        freq.update(grams)
        df.update(set(grams))
    if n_docs == 0:
        raise ValidationError("no training paragraphs to build a vocabulary from")
    top = heapq.nsmallest(k, freq.items(), key=lambda item: (-item[1], item[0]))
    entries = [gram for gram, _ in top]
    return NGramVocab(
        n=n,
        entries=entries,
        freq={g: freq[g] for g in entries},
        df={g: df[g] for g in entries},
        n_train_docs=n_docs,
        k=k,
    )


def vectorize(vocab: NGramVocab, tokens: Sequence[str]) -> dict[int, float]:
    """Sparse tf-idf vector of a token sequence (vocab index -> weight)."""
    counts = Counter(ngrams(list(tokens), vocab.n))
    vec: dict[int, float] = {}
    for gram, count in counts.items():
        i = vocab.index_of(gram)
        if i is not None:
            vec[i] = count * float(vocab._idf[i])
    return vec


def tfidf_score(vocab: NGramVocab, query: Sequence[str], doc: Sequence[str]) -> float:
    """Cosine similarity of the two tf-idf vectors; 0 if either is zero."""
    q = vectorize(vocab, query)
    d = vectorize(vocab, doc)
    qn = math.sqrt(math.fsum(w * w for w in q.values()))
    dn = math.sqrt(math.fsum(w * w for w in d.values()))
    if qn == 0.0 or dn == 0.0:
        return 0.0
    dot = math.fsum(w * d[i] for i, w in q.items() if i in d)
    return dot / (qn * dn)


class TfidfIndex:
    """Candidate pool as a row-normalized tf-idf matrix over the vocab."""

    def __init__(self, vocab: NGramVocab, candidates: Iterable[Paragraph], tokenizer=tokenize):
        docs = sorted(candidates, key=lambda p: p.id)
        if not docs:
            raise ValidationError("cannot build a TF-IDF index over an empty candidate set")
        rows: list[int] = []
        cols: list[int] = []
        data: list[float] = []
        for row, para in enumerate(docs):
            for gram, c in Counter(ngrams(tokenizer(para.text), vocab.n)).items():
                col = vocab.index_of(gram)
                if col is not None:
                    rows.append(row)
                    cols.append(col)
                    data.append(float(c))
        counts = sparse.csr_matrix(
            (data, (rows, cols)), shape=(len(docs), len(vocab)), dtype=np.float64
        )
        self._init(vocab, [p.id for p in docs], counts)

    @classmethod
    def from_counts(
        cls, vocab: NGramVocab, doc_ids: list[ParagraphId], counts: sparse.csr_matrix
    ) -> "TfidfIndex":
        """Rebuild from stored raw counts (snapshot loading)."""
        index = cls.__new__(cls)
        index._init(vocab, doc_ids, counts.astype(np.float64))
        return index

    def _init(self, vocab: NGramVocab, doc_ids: list[ParagraphId], counts: sparse.csr_matrix) -> None:
        self.vocab = vocab
        self.doc_ids = doc_ids
        self.tokenizer_id = ""
        counts.sort_indices()
        self._counts = counts
        weighted = counts.multiply(vocab._idf[np.newaxis, :]).tocsr()
        norms = np.sqrt(weighted.multiply(weighted).sum(axis=1)).A1
        inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        self._matrix = weighted.multiply(inv[:, np.newaxis]).tocsr()

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def raw_counts(self) -> sparse.csr_matrix:
        return self._counts

    def score_all(self, query: Sequence[str]) -> np.ndarray:
        """Cosine against every candidate, aligned with ``doc_ids``."""
        vec = vectorize(self.vocab, query)
        q = np.zeros(len(self.vocab), dtype=np.float64)
        for i, w in vec.items():
            q[i] = w
        qn = np.linalg.norm(q)
        if qn == 0.0:
            return np.zeros(self.n_docs, dtype=np.float64)
        return self._matrix @ (q / qn)

    def top_k(self, query: Sequence[str], k: int) -> list[tuple[ParagraphId, float]]:
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        scores = self.score_all(query)
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.doc_ids[i], float(scores[i])) for i in order]
