"""IR metrics over rankings with binary relevance, macro-averaged.

Per query: Recall@k for k in {1, 5, 10, 20}, nDCG@10 (binary gains,
1/log2(rank+1) discount, ideal truncated at min(k, |relevant|)),
average precision and reciprocal rank. AP and RR are defined on the
exhaustive ranking: every relevant document must have a rank. Report
values are unweighted means over queries, accumulated with compensated
summation so reduction order never matters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import ValidationError
from .trec import RunRanking, iter_run_rows

RECALL_KS = (1, 5, 10, 20)
METRIC_FIELDS = ("recall@1", "recall@5", "recall@10", "recall@20", "ndcg@10", "map", "mrr")


def recall_at_k(ranked: Sequence[str], relevant: set[str], k: int) -> float:
    """|relevant ∩ top-k| / |relevant|."""
    if not relevant:
        raise ValidationError("relevant set is empty")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    hits = sum(1 for doc in ranked[:k] if doc in relevant)
    return hits / len(relevant)


def ndcg_at_k(ranked: Sequence[str], relevant: set[str], k: int = 10) -> float:
    """Binary-gain DCG@k over ideal DCG@k, ranks 1-based."""
    if not relevant:
        raise ValidationError("relevant set is empty")
    dcg = math.fsum(
        1.0 / math.log2(i + 1) for i, doc in enumerate(ranked[:k], start=1) if doc in relevant
    )
    ideal = math.fsum(1.0 / math.log2(i + 1) for i in range(1, min(k, len(relevant)) + 1))
    return dcg / ideal


def average_precision(ranked: Sequence[str], relevant: set[str]) -> float:
    """Mean over relevant docs of precision at that doc's rank.

    ``ranked`` must be exhaustive: every relevant doc needs a rank.
    """
    if not relevant:
        raise ValidationError("relevant set is empty")
    hits = 0
    precisions = []
    found = set()
    for rank, doc in enumerate(ranked, start=1):
        if doc in relevant:
            hits += 1
            precisions.append(hits / rank)
            found.add(doc)
    if len(found) != len(relevant):
        missing = sorted(relevant - found)
        raise ValidationError(f"relevant docs absent from ranking: {', '.join(missing)}")
    return math.fsum(precisions) / len(relevant)


def reciprocal_rank(ranked: Sequence[str], relevant: set[str]) -> float:
    """1 / rank of the first relevant doc (the ranking must contain one)."""
    if not relevant:
        raise ValidationError("relevant set is empty")
    for rank, doc in enumerate(ranked, start=1):
        if doc in relevant:
            return 1.0 / rank
    raise ValidationError("no relevant doc present in the ranking")


@dataclass(frozen=True)
class MetricsReport:
    recall_at: dict[int, float]
    ndcg_at_10: float
    map: float
    mrr: float
    query_count: int
    run_tag: str = ""
    per_query: dict[str, dict[str, float]] | None = None

    def as_dict(self) -> dict:
        out: dict = {f"recall@{k}": self.recall_at[k] for k in RECALL_KS}
        out["ndcg@10"] = self.ndcg_at_10
        out["map"] = self.map
        out["mrr"] = self.mrr
        out["query_count"] = self.query_count
        out["run_tag"] = self.run_tag
        return out


def query_metrics_from_hits(
    hit_ranks: Sequence[int], n_relevant: int, exhaustive: bool
) -> dict[str, float]:
    """All per-query metrics from the ranks of the relevant docs alone.

    ``hit_ranks`` are the 1-based ranks of relevant docs found in the
    ranking, ascending. Counting non-relevant tail rows is unnecessary:
    recall/nDCG need only ranks <= k, and AP/RR need only relevant
    ranks, provided the ranking was exhaustive (``exhaustive`` asserts
    all ``n_relevant`` docs were found).
    """
    if n_relevant < 1:
        raise ValidationError("relevant set is empty")
    out: dict[str, float] = {}
    for k in RECALL_KS:
        out[f"recall@{k}"] = sum(1 for r in hit_ranks if r <= k) / n_relevant
    dcg = math.fsum(1.0 / math.log2(r + 1) for r in hit_ranks if r <= 10)
    ideal = math.fsum(1.0 / math.log2(i + 1) for i in range(1, min(10, n_relevant) + 1))
    out["ndcg@10"] = dcg / ideal
    if exhaustive:
        if len(hit_ranks) != n_relevant:
            raise ValidationError("exhaustive flag set but not all relevant docs were ranked")
        out["map"] = math.fsum((i + 1) / r for i, r in enumerate(hit_ranks)) / n_relevant
        out["mrr"] = 1.0 / hit_ranks[0]
    return out


def _macro_mean(per_query: Iterable[dict[str, float]], field: str) -> float:
    values = [m[field] for m in per_query]
    return math.fsum(values) / len(values)


def _aggregate(
    per_query: dict[str, dict[str, float]], run_tag: str, keep_per_query: bool
) -> MetricsReport:
    rows = list(per_query.values())
    return MetricsReport(
        recall_at={k: _macro_mean(rows, f"recall@{k}") for k in RECALL_KS},
        ndcg_at_10=_macro_mean(rows, "ndcg@10"),
        map=_macro_mean(rows, "map"),
        mrr=_macro_mean(rows, "mrr"),
        query_count=len(rows),
        run_tag=run_tag,
        per_query=per_query if keep_per_query else None,
    )


def evaluate_run(
    relevant_by_query: dict[str, set[str]],
    run: RunRanking,
    keep_per_query: bool = False,
) -> MetricsReport:
    """Score an in-memory run against per-query relevant sets.

    Every query needs rows in the run, and the run must rank every
    relevant doc (exhaustive depth) for MAP/MRR to be well defined.
    """
    if not relevant_by_query:
        raise ValidationError("no queries to evaluate")
    per_query: dict[str, dict[str, float]] = {}
    for qid in sorted(relevant_by_query):
        relevant = relevant_by_query[qid]
        if qid not in run:
            raise ValidationError(f"query {qid} missing from run")
        ranked = run[qid]
        hit_ranks = []
        found: set[str] = set()
        for rank, (doc, _) in enumerate(ranked, start=1):
            if doc in relevant:
                if doc in found:
                    raise ValidationError(f"query {qid}: doc {doc} ranked more than once")
                found.add(doc)
                hit_ranks.append(rank)
        if len(found) != len(relevant):
            missing = sorted(relevant - found)
            raise ValidationError(
                f"run depth insufficient for query {qid}: relevant docs missing: "
                + ", ".join(missing)
            )
        per_query[qid] = query_metrics_from_hits(hit_ranks, len(relevant), exhaustive=True)
    return _aggregate(per_query, run.run_tag, keep_per_query)


def evaluate_run_file(
    relevant_by_query: dict[str, set[str]],
    source: IO[str],
    run_tag: str = "",
    path: str = "<run>",
    keep_per_query: bool = False,
) -> MetricsReport:
    """Stream a TREC run file of any depth without holding it in memory."""
    if not relevant_by_query:
        raise ValidationError("no queries to evaluate")
    per_query: dict[str, dict[str, float]] = {}
    current: str | None = None
    hit_ranks: list[int] = []
    found: set[str] = set()

    def close_group() -> None:
        if current is None or current not in relevant_by_query:
            return
        relevant = relevant_by_query[current]
        if len(hit_ranks) != len(relevant):
            raise ValidationError(
                f"run depth insufficient for query {current}: "
                f"{len(relevant) - len(hit_ranks)} relevant doc(s) never ranked"
            )
        per_query[current] = query_metrics_from_hits(hit_ranks, len(relevant), exhaustive=True)

    for qid, doc, rank, _score in iter_run_rows(source, path):
        if qid != current:
            close_group()
            current = qid
            hit_ranks = []
            found = set()
        if qid in relevant_by_query and doc in relevant_by_query[qid]:
            if doc in found:
                raise ValidationError(f"{path}: query {qid}: doc {doc} ranked more than once")
            found.add(doc)
            hit_ranks.append(rank)
    close_group()

    missing = sorted(set(relevant_by_query) - set(per_query))
    if missing:
        raise ValidationError(f"queries missing from run: {', '.join(missing)}")
    return _aggregate(per_query, run_tag, keep_per_query)


def write_per_query_csv(report: MetricsReport, out: IO[str]) -> None:
    if report.per_query is None:
        raise ValidationError("report was built without per-query rows")
    out.write("query_id," + ",".join(METRIC_FIELDS) + "\n")
    for qid in sorted(report.per_query):
        row = report.per_query[qid]
        out.write(qid + "," + ",".join(f"{row[f]:.6f}" for f in METRIC_FIELDS) + "\n")
