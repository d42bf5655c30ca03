"""Temporal train/valid/test splitting and evaluation-task construction.

Paragraphs are assigned to splits by the calendar year of their decision
date. Edges between two test paragraphs are purged so the test period
has no internal dependencies; each remaining test paragraph with at
least one outbound edge becomes one query whose relevant set is its
cited ids, ranked against the train+valid candidate pool.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import IO

from .corpus import CitationGraph, Corpus, ParagraphId
from .errors import ValidationError


@dataclass(frozen=True)
class SplitBoundaries:
    """Last calendar year of train and of valid; test is everything after."""

    train_end_year: int
    valid_end_year: int

    def __post_init__(self) -> None:
        if self.train_end_year >= self.valid_end_year:
            raise ValidationError(
                f"train_end_year {self.train_end_year} must precede "
                f"valid_end_year {self.valid_end_year}"
            )


@dataclass(frozen=True)
class SplitSet:
    boundaries: SplitBoundaries
    train: frozenset[ParagraphId]
    valid: frozenset[ParagraphId]
    test: frozenset[ParagraphId]
    #: test->test edges removed from the graph
    purged_edges: frozenset[tuple[ParagraphId, ParagraphId]]
    #: test-period paragraphs left with no retained edge at all
    orphaned_test: frozenset[ParagraphId]

    def retained(self, edge: tuple[ParagraphId, ParagraphId]) -> bool:
        return edge not in self.purged_edges


@dataclass(frozen=True)
class RetrievalTask:
    """Frozen evaluation problem: queries with relevant sets over a pool."""

    queries: tuple[tuple[ParagraphId, frozenset[ParagraphId]], ...]
    candidates: frozenset[ParagraphId]
    #: test paragraphs whose every citation was purged (no query emitted)
    dropped_queries: int = 0

    def __post_init__(self) -> None:
        for qid, relevant in self.queries:
            if not relevant:
                raise ValidationError(f"query {qid} has an empty relevant set")
            if qid in self.candidates:
                raise ValidationError(f"query {qid} appears in the candidate pool")
            missing = relevant - self.candidates
            if missing:
                raise ValidationError(
                    f"query {qid} has relevant ids outside the candidate pool: "
                    + ", ".join(str(m) for m in sorted(missing))
                )

    @property
    def relevant_by_query(self) -> dict[ParagraphId, frozenset[ParagraphId]]:
        return dict(self.queries)

    def total_relevant(self) -> int:
        return sum(len(rel) for _, rel in self.queries)


def temporal_split(corpus: Corpus, graph: CitationGraph, boundaries: SplitBoundaries) -> SplitSet:
    """Assign paragraphs to splits by decision year and purge test->test edges.

    Train and valid keep every paragraph of their periods. The test set
    keeps only paragraphs still incident to a retained edge; test-period
    paragraphs whose every edge was purged are recorded as orphaned.
    Deterministic: output depends only on (corpus, graph, boundaries).
    """
    train: set[ParagraphId] = set()
    valid: set[ParagraphId] = set()
    test_period: set[ParagraphId] = set()
    for p in corpus:
        year = p.date.year
        if year <= boundaries.train_end_year:
            train.add(p.id)
        elif year <= boundaries.valid_end_year:
            valid.add(p.id)
        else:
            test_period.add(p.id)

    purged = frozenset(
        (citing, cited)
        for citing, cited in graph.edges
        if citing in test_period and cited in test_period
    )
    incident: set[ParagraphId] = set()
    for citing, cited in graph.edges:
        if (citing, cited) in purged:
            continue
        if citing in test_period:
            incident.add(citing)
        if cited in test_period:
            incident.add(cited)
    return SplitSet(
        boundaries=boundaries,
        train=frozenset(train),
        valid=frozenset(valid),
        test=frozenset(incident),
        purged_edges=purged,
        orphaned_test=frozenset(test_period - incident),
    )


def build_task(splits: SplitSet, graph: CitationGraph) -> RetrievalTask:
    """One query per test paragraph with >= 1 retained outbound edge.

    The candidate pool is all train+valid paragraphs; a query's relevant
    set is its retained cited ids. Test paragraphs whose citations were
    all purged are dropped and counted. Queries come out sorted by id.
    """
    candidates = frozenset(splits.train | splits.valid)
    queries: list[tuple[ParagraphId, frozenset[ParagraphId]]] = []
    dropped = 0
    for qid in sorted(splits.test | splits.orphaned_test):
        outbound = graph.cited_by(qid)
        if not outbound:
            continue
        retained = frozenset(c for c in outbound if (qid, c) not in splits.purged_edges)
        if retained:
            queries.append((qid, retained))
        else:
            dropped += 1
    return RetrievalTask(tuple(queries), candidates, dropped_queries=dropped)


def split_counts(splits: SplitSet, graph: CitationGraph) -> dict:
    """Per-split paragraph and citation counts for the split report.

    Citation counting follows the task framing: a split's citations are
    the edges whose citing paragraph lies in the split and whose cited
    endpoint lies in that split's accessible pool (train for train,
    train+valid for valid and test). The test figure therefore equals
    the sum of relevant-set sizes over queries.
    """
    train, valid = splits.train, splits.valid
    test = splits.test | splits.orphaned_test
    pool = train | valid

    def bucket(citing: ParagraphId, cited: ParagraphId) -> str | None:
        if citing in train and cited in train:
            return "train"
        if citing in valid and cited in pool:
            return "valid"
        if citing in test and cited in pool:
            return "test"
        return None

    counts = {"train": 0, "valid": 0, "test": 0}
    raw = {"train": 0, "valid": 0, "test": 0}
    for citing, cited in graph.edges:
        name = bucket(citing, cited)
        if name is not None:
            counts[name] += 1
            raw[name] += 1 + graph.duplicate_edges.get((citing, cited), 0)
    return {
        "train": {"paragraphs": len(train), "citations": counts["train"]},
        "valid": {"paragraphs": len(valid), "citations": counts["valid"]},
        "test": {"paragraphs": len(splits.test), "citations": counts["test"]},
        "citations_including_duplicate_rows": raw,
        "test_period_paragraphs": len(test),
        "orphaned_test_paragraphs": len(splits.orphaned_test),
        "purged_edges": len(splits.purged_edges),
    }


def write_qrels(task: RetrievalTask, out: IO[str]) -> None:
    """TREC qrels: ``<query_id> 0 <doc_id> 1`` per relevant pair."""
    for qid, relevant in task.queries:
        for doc in sorted(relevant):
            out.write(f"{qid} 0 {doc} 1\n")


def read_qrels(source: IO[str], path: str = "<qrels>") -> dict[str, set[str]]:
    """Parse TREC qrels into query_id -> relevant doc ids (relevance > 0)."""
    relevant: dict[str, set[str]] = {}
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValidationError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        qid, _, doc, rel = parts
        try:
            rel_value = int(rel)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: relevance {rel!r} is not an integer") from None
        if rel_value > 0:
            relevant.setdefault(qid, set()).add(doc)
    return relevant
