"""TREC run files: the interchange format for rankings.

A run groups, per query, an ordered candidate list with scores. Rows
produced by this package are strictly ordered by (-score, doc id) and
printed with 6-decimal scores, so identical rankings are byte-identical
files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterator

from .errors import ValidationError


@dataclass
class RunRanking:
    """Per-query ordered (doc_id, score) lists plus the run tag."""

    run_tag: str
    rankings: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def add(self, query_id: str, ranked: list[tuple[str, float]]) -> None:
        if query_id in self.rankings:
            raise ValidationError(f"query {query_id} already present in run")
        self.rankings[query_id] = ranked

    def __contains__(self, query_id: str) -> bool:
        return query_id in self.rankings

    def __getitem__(self, query_id: str) -> list[tuple[str, float]]:
        return self.rankings[query_id]


def write_run(run: RunRanking, out: IO[str], depth: int | None = None) -> None:
    """Write ``<qid> Q0 <doc> <rank> <score> <tag>`` rows, queries sorted.

    ``depth`` truncates the exported rows per query; it never affects
    the ranking itself.
    """
    for qid in sorted(run.rankings):
        ranked = run.rankings[qid]
        if depth is not None:
            ranked = ranked[:depth]
        for rank, (doc, score) in enumerate(ranked, start=1):
            out.write(f"{qid} Q0 {doc} {rank} {score:.6f} {run.run_tag}\n")


def iter_run_rows(source: IO[str], path: str = "<run>") -> Iterator[tuple[str, str, int, float]]:
    """Stream validated (query_id, doc_id, rank, score) rows.

    Enforces the run-file shape while streaming: rows of one query are
    contiguous, ranks count up from 1, scores never increase within a
    query. Suited to full-depth files too large to hold in memory.
    """
    current: str | None = None
    seen: set[str] = set()
    expected_rank = 0
    last_score = 0.0
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValidationError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        qid, _, doc, rank_s, score_s, _tag = parts
        try:
            rank, score = int(rank_s), float(score_s)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad rank or score") from None
        if qid != current:
            if qid in seen:
                raise ValidationError(f"{path}:{lineno}: rows for query {qid} are not contiguous")
            seen.add(qid)
            current = qid
            expected_rank = 1
        else:
            expected_rank += 1
            if score > last_score:
                raise ValidationError(f"{path}:{lineno}: scores increase within query {qid}")
        if rank != expected_rank:
            raise ValidationError(f"{path}:{lineno}: rank {rank}, expected {expected_rank}")
        last_score = score
        yield qid, doc, rank, score


def read_run(source: IO[str], path: str = "<run>") -> RunRanking:
    """Load a whole run file into memory (small runs / tests)."""
    run = RunRanking(run_tag="")
    for lineno, line in enumerate(source, start=1):
        if line.strip():
            parts = line.split()
            if len(parts) == 6:
                run.run_tag = parts[5]
            break
    source.seek(0)
    for qid, doc, _rank, score in iter_run_rows(source, path):
        run.rankings.setdefault(qid, []).append((doc, score))
    return run


def read_run_tag(path: str) -> str:
    """Run tag from the first row of a run file ('' for an empty file)."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                return parts[5] if len(parts) == 6 else ""
    return ""
