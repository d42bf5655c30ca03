"""Overlap structure behind the performance gap between two runs.

For each query, three word-level similarity proxies against its
relevant paragraphs: Levenshtein edit distance (whole-text similarity),
n-grams in common for n = 2..10 (contiguous overlap, multiset
intersection), and longest common subsequence (non-contiguous overlap,
a paraphrase proxy). Queries are partitioned by a per-query metric into
scenario groups (both runs perfect, only A perfect, ...), and group
differences are tested with Welch's unequal-variance t-test.
"""
from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy import special

from .corpus import Corpus, ParagraphId
from .errors import ValidationError
from .tokens import ngrams, tokenize
from .trec import RunRanking, iter_run_rows

NGRAM_RANGE = range(2, 11)


# ---------------------------------------------------------------------------
# Pairwise word-level metrics (row-vectorized dynamic programs)
# ---------------------------------------------------------------------------


def _encode_pair(a: Sequence[str], b: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    codes: dict[str, int] = {}
    for tok in a:
        codes.setdefault(tok, len(codes))
    for tok in b:
        codes.setdefault(tok, len(codes))
    enc_a = np.fromiter((codes[t] for t in a), dtype=np.int64, count=len(a))
    enc_b = np.fromiter((codes[t] for t in b), dtype=np.int64, count=len(b))
    return enc_a, enc_b


def word_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance over tokens, unit-cost insert/delete/substitute."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    enc_a, enc_b = _encode_pair(a, b)
    idx = np.arange(len(b) + 1, dtype=np.int64)
    prev = idx.copy()
    cur = np.empty_like(prev)
    for i, ai in enumerate(enc_a):
        cur[0] = i + 1
        np.minimum(prev[:-1] + (enc_b != ai), prev[1:] + 1, out=cur[1:])
        # fold in left-to-right insertions: cur[j] = min_m<=j (cur[m] + j - m)
        cur = np.minimum.accumulate(cur - idx) + idx
        prev, cur = cur, prev
    return int(prev[-1])


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length (order-preserving, with gaps)."""
    if not a or not b:
        return 0
    enc_a, enc_b = _encode_pair(a, b)
    prev = np.zeros(len(b) + 1, dtype=np.int64)
    cur = np.empty_like(prev)
    for ai in enc_a:
        cur[0] = 0
        np.maximum(prev[1:], prev[:-1] + (enc_b == ai), out=cur[1:])
        cur = np.maximum.accumulate(cur)
        prev, cur = cur, prev
    return int(prev[-1])


def common_ngram_count(a: Sequence[str], b: Sequence[str], n: int) -> int:
    """Multiset intersection size of the two n-gram bags."""
    count_a = Counter(ngrams(list(a), n))
    count_b = Counter(ngrams(list(b), n))
    return sum((count_a & count_b).values())


# ---------------------------------------------------------------------------
# Per-query similarity profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityProfile:
    query_id: str
    mean_edit_distance: float
    common_ngrams: dict[int, float]     # n in 2..10, mean over relevant
    lcs: float
    query_len: int


def profile_pair(query_tokens: Sequence[str], doc_tokens: Sequence[str]) -> dict:
    return {
        "edit_distance": word_edit_distance(query_tokens, doc_tokens),
        "lcs": lcs_length(query_tokens, doc_tokens),
        "ngrams": {n: common_ngram_count(query_tokens, doc_tokens, n) for n in NGRAM_RANGE},
    }


def similarity_profile(
    relevant_by_query: dict[str, set[str]],
    query_id: str,
    corpus: Corpus,
    tokenizer=tokenize,
) -> SimilarityProfile:
    """Mean pairwise overlap between a query and its relevant paragraphs."""
    if query_id not in relevant_by_query:
        raise ValidationError(f"unknown query {query_id}")
    query_tokens = tokenizer(corpus[ParagraphId.parse(query_id)].text)
    pairs = [
        profile_pair(query_tokens, tokenizer(corpus[ParagraphId.parse(doc)].text))
        for doc in sorted(relevant_by_query[query_id])
    ]
    n = len(pairs)
    return SimilarityProfile(
        query_id=query_id,
        mean_edit_distance=math.fsum(p["edit_distance"] for p in pairs) / n,
        common_ngrams={
            g: math.fsum(p["ngrams"][g] for p in pairs) / n for g in NGRAM_RANGE
        },
        lcs=math.fsum(p["lcs"] for p in pairs) / n,
        query_len=len(query_tokens),
    )


# ---------------------------------------------------------------------------
# Scenario partitioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioPartition:
    metric: str
    both_perfect: frozenset[str]
    a_only: frozenset[str]          # metric(A) = 1 and metric(B) = 0 exactly
    b_only: frozenset[str]
    neither: frozenset[str]


def parse_metric_spec(spec: str) -> int:
    """Supported per-query metrics: ``recall@<k>`` with k >= 1."""
    name, sep, k_s = spec.partition("@")
    if name != "recall" or not sep:
        raise ValidationError(f"unsupported metric {spec!r}; use recall@<k>")
    try:
        k = int(k_s)
    except ValueError:
        raise ValidationError(f"unsupported metric {spec!r}; use recall@<k>") from None
    if k < 1:
        raise ValidationError(f"metric cutoff must be >= 1, got {k}")
    return k


def per_query_recall(
    relevant_by_query: dict[str, set[str]], run: RunRanking, k: int
) -> dict[str, float]:
    out: dict[str, float] = {}
    for qid, relevant in relevant_by_query.items():
        if qid not in run:
            raise ValidationError(f"query {qid} missing from run")
        ranked = [doc for doc, _ in run[qid][:k]]
        out[qid] = sum(1 for doc in ranked if doc in relevant) / len(relevant)
    return out


def stream_per_query_recall(
    relevant_by_query: dict[str, set[str]], source: IO[str], k: int, path: str = "<run>"
) -> dict[str, float]:
    """Per-query recall@k from a run file of any depth, streaming."""
    hits: dict[str, set[str]] = {}
    for qid, doc, rank, _score in iter_run_rows(source, path):
        if qid not in relevant_by_query:
            continue
        found = hits.setdefault(qid, set())
        if rank <= k and doc in relevant_by_query[qid]:
            if doc in found:
                raise ValidationError(f"{path}: query {qid}: doc {doc} ranked more than once")
            found.add(doc)
    missing = sorted(set(relevant_by_query) - set(hits))
    if missing:
        raise ValidationError(f"queries missing from run: {', '.join(missing)}")
    return {qid: len(hits[qid]) / len(relevant_by_query[qid]) for qid in relevant_by_query}


def partition_from_metrics(
    metric: str, values_a: dict[str, float], values_b: dict[str, float]
) -> ScenarioPartition:
    both, a_only, b_only, neither = set(), set(), set(), set()
    for qid, av in values_a.items():
        bv = values_b[qid]
        if av == 1.0 and bv == 1.0:
            both.add(qid)
        elif av == 1.0 and bv == 0.0:
            a_only.add(qid)
        elif av == 0.0 and bv == 1.0:
            b_only.add(qid)
        else:
            neither.add(qid)
    return ScenarioPartition(
        metric=metric,
        both_perfect=frozenset(both),
        a_only=frozenset(a_only),
        b_only=frozenset(b_only),
        neither=frozenset(neither),
    )


def partition_scenarios(
    relevant_by_query: dict[str, set[str]],
    run_a: RunRanking,
    run_b: RunRanking,
    metric_spec: str,
) -> ScenarioPartition:
    """Bucket queries by whether each run scores the metric 1 or 0."""
    k = parse_metric_spec(metric_spec)
    return partition_from_metrics(
        metric_spec,
        per_query_recall(relevant_by_query, run_a, k),
        per_query_recall(relevant_by_query, run_b, k),
    )


# ---------------------------------------------------------------------------
# Welch's t-test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    significant_at_5pct: bool

    def as_dict(self) -> dict:
        return {
            "t_statistic": self.t_statistic,
            "degrees_of_freedom": self.degrees_of_freedom,
            "p_value": self.p_value,
            "significant_at_5pct": self.significant_at_5pct,
        }


def welch_t_test(xs: Sequence[float], ys: Sequence[float]) -> TestResult:
    """Two-sided Welch test of equal means, unequal variances allowed.

    Degrees of freedom by Welch-Satterthwaite; the p-value comes from
    the regularized incomplete beta form of the t distribution's CDF.
    """
    nx, ny = len(xs), len(ys)
    if nx < 2 or ny < 2:
        raise ValidationError(f"need at least 2 observations per sample, got {nx} and {ny}")
    mx = math.fsum(xs) / nx
    my = math.fsum(ys) / ny
    vx = math.fsum((x - mx) ** 2 for x in xs) / (nx - 1)
    vy = math.fsum((y - my) ** 2 for y in ys) / (ny - 1)
    if vx == 0.0 or vy == 0.0:
        raise ValidationError("a sample has zero variance; Welch's test is undefined")
    sx, sy = vx / nx, vy / ny
    se = math.sqrt(sx + sy)
    t = (mx - my) / se
    df = (sx + sy) ** 2 / (sx * sx / (nx - 1) + sy * sy / (ny - 1))
    # two-sided p: P(|T_df| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TestResult(
        t_statistic=t,
        degrees_of_freedom=df,
        p_value=p,
        significant_at_5pct=p < 0.05,
    )


# ---------------------------------------------------------------------------
# Gap report
# ---------------------------------------------------------------------------

QUANTITIES = ("edit_distance", "lcs", "query_len") + tuple(f"ngrams_{n}" for n in NGRAM_RANGE)


@dataclass(frozen=True)
class GroupStats:
    count: int
    mean: float
    std: float          # sample std (ddof=1), the Welch test's variance
    median: float

    def as_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "std": self.std, "median": self.median}


def _group_stats(values: Sequence[float]) -> GroupStats | None:
    if not values:
        return None
    n = len(values)
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    return GroupStats(count=n, mean=mean, std=std, median=float(statistics.median(values)))


@dataclass(frozen=True)
class GapReport:
    metric: str
    run_a_tag: str
    run_b_tag: str
    group_sizes: dict[str, int]
    stats: dict[str, dict[str, GroupStats]]       # quantity -> group -> stats
    tests: dict[str, TestResult]                  # quantity -> a_only vs both_perfect
    notices: list[str]

    def as_dict(self) -> dict:
        return {
            "metric": self.metric,
            "run_a_tag": self.run_a_tag,
            "run_b_tag": self.run_b_tag,
            "group_sizes": dict(sorted(self.group_sizes.items())),
            "stats": {
                q: {g: s.as_dict() for g, s in groups.items()}
                for q, groups in self.stats.items()
            },
            "tests": {q: t.as_dict() for q, t in self.tests.items()},
            "notices": list(self.notices),
        }


def _quantity_value(profile: SimilarityProfile, quantity: str) -> float:
    if quantity == "edit_distance":
        return profile.mean_edit_distance
    if quantity == "lcs":
        return profile.lcs
    if quantity == "query_len":
        return float(profile.query_len)
    return profile.common_ngrams[int(quantity.rsplit("_", 1)[1])]


def gap_report_from_partition(
    partition: ScenarioPartition,
    relevant_by_query: dict[str, set[str]],
    corpus: Corpus,
    run_a_tag: str = "A",
    run_b_tag: str = "B",
    tokenizer=tokenize,
) -> GapReport:
    """Group statistics and Welch tests for both_perfect vs a_only."""
    profiles: dict[str, list[SimilarityProfile]] = {}
    for group_name, qids in (("both_perfect", partition.both_perfect), ("a_only", partition.a_only)):
        profiles[group_name] = [
            similarity_profile(relevant_by_query, qid, corpus, tokenizer)
            for qid in sorted(qids)
        ]
    stats: dict[str, dict[str, GroupStats]] = {}
    tests: dict[str, TestResult] = {}
    notices: list[str] = []
    for quantity in QUANTITIES:
        by_group: dict[str, GroupStats] = {}
        values: dict[str, list[float]] = {}
        for group_name, group_profiles in profiles.items():
            values[group_name] = [_quantity_value(p, quantity) for p in group_profiles]
            group_stats = _group_stats(values[group_name])
            if group_stats is not None:
                by_group[group_name] = group_stats
        stats[quantity] = by_group
        try:
            tests[quantity] = welch_t_test(values["a_only"], values["both_perfect"])
        except ValidationError as exc:
            notices.append(f"{quantity}: test skipped ({exc})")
    return GapReport(
        metric=partition.metric,
        run_a_tag=run_a_tag,
        run_b_tag=run_b_tag,
        group_sizes={
            "both_perfect": len(partition.both_perfect),
            "a_only": len(partition.a_only),
            "b_only": len(partition.b_only),
            "neither": len(partition.neither),
        },
        stats=stats,
        tests=tests,
        notices=notices,
    )


def gap_report(
    relevant_by_query: dict[str, set[str]],
    run_a: RunRanking,
    run_b: RunRanking,
    metric_spec: str,
    corpus: Corpus,
    tokenizer=tokenize,
) -> GapReport:
    partition = partition_scenarios(relevant_by_query, run_a, run_b, metric_spec)
    return gap_report_from_partition(
        partition,
        relevant_by_query,
        corpus,
        run_a_tag=run_a.run_tag or "A",
        run_b_tag=run_b.run_tag or "B",
        tokenizer=tokenizer,
    )


def write_ngram_curves(report: GapReport, out: IO[str]) -> None:
    """Fig-style curve data: columns n, group, mean, std."""
    out.write("n,group,mean,std\n")
    for n in NGRAM_RANGE:
        for group in ("both_perfect", "a_only"):
            stats = report.stats[f"ngrams_{n}"].get(group)
            if stats is not None:
                out.write(f"{n},{group},{stats.mean:.6f},{stats.std:.6f}\n")


# ---------------------------------------------------------------------------
# Overlap highlighting
# ---------------------------------------------------------------------------


def highlight_overlap(
    a: str, b: str, tokenizer=tokenize, min_length: int = 4
) -> list[tuple[int, int, int]]:
    """Maximal common contiguous token runs, greedily longest first.

    Returns (start_a, start_b, length) triples, non-overlapping within
    each text, for runs of at least ``min_length`` tokens. Ties go to
    the smallest (start_a, start_b).
    """
    if min_length < 1:
        raise ValidationError(f"minimum span length must be >= 1, got {min_length}")
    tokens_a = tokenizer(a)
    tokens_b = tokenizer(b)
    if not tokens_a or not tokens_b:
        return []
    codes: dict[str, int] = {}
    enc_a = [codes.setdefault(t, len(codes)) for t in tokens_a]
    enc_b = [codes.setdefault(t, len(codes)) for t in tokens_b]
    # consumed positions get unique negative sentinels so matches never
    # cross a previously reported span
    arr_a = np.asarray(enc_a, dtype=np.int64)
    arr_b = np.asarray(enc_b, dtype=np.int64)
    spans: list[tuple[int, int, int]] = []
    while True:
        best_len, best_sa, best_sb = 0, -1, -1
        prev = np.zeros(len(arr_b) + 1, dtype=np.int64)
        cur = np.empty_like(prev)
        for i, ai in enumerate(arr_a):
            cur[0] = 0
            np.multiply(prev[:-1] + 1, arr_b == ai, out=cur[1:])
            row_best = int(cur.max())
            if row_best > best_len:
                # leftmost j with the maximal run ending at (i, j)
                j = int(np.argmax(cur == row_best))
                best_len, best_sa, best_sb = row_best, i - row_best + 1, j - row_best
            prev, cur = cur, prev
        if best_len < min_length:
            break
        spans.append((best_sa, best_sb, best_len))
        arr_a[best_sa : best_sa + best_len] = -(2 * len(spans))
        arr_b[best_sb : best_sb + best_len] = -(2 * len(spans) + 1)
    return spans
