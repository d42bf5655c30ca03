"""
Explaining a performance gap between two runs
=============================================

Queries are partitioned by a per-query metric (here recall@1) into
scenario groups: both runs perfect, only A perfect, only B perfect,
neither. For the first two groups the engine profiles query/relevant
overlap (word edit distance, common n-grams for n=2..10, longest common
subsequence, query length) and Welch-tests the group means.
"""
import datetime
import random

from citeval import (
    Corpus,
    Paragraph,
    ParagraphId,
    RunRanking,
    gap_report,
    highlight_overlap,
    welch_t_test,
)

rng = random.Random(4)
paragraphs, relevant = [], {}
run_a, run_b = RunRanking(run_tag="lexical"), RunRanking(run_tag="dense")

for i in range(1, 21):
    cited_text = " ".join(rng.choice(["law", "duty", "court", "right", "care",
                                      "rule", "case", "claim"]) for _ in range(rng.randint(6, 14)))
    paragraphs.append(Paragraph(ParagraphId("d", i), "demo", datetime.date(2010, 1, 1), cited_text))
    quoting = i <= 10  # first half of the queries quote their target
    if quoting:
        query_text = cited_text + " " + " ".join(rng.choice(["extra", "tail"]) for _ in range(3))
    else:
        query_text = " ".join(rng.choice(["tax", "fish", "milk", "goods"]) for _ in range(10))
    paragraphs.append(Paragraph(ParagraphId("q", i), "demo", datetime.date(2020, 1, 1), query_text))
    relevant[f"q:{i}"] = {f"d:{i}"}
    run_a.add(f"q:{i}", [(f"d:{i}", 2.0), ("d:99", 1.0)])                  # A always finds it
    hit_for_b = [(f"d:{i}", 2.0), ("d:99", 1.0)] if quoting else [("d:99", 2.0), (f"d:{i}", 1.0)]
    run_b.add(f"q:{i}", hit_for_b)                                          # B only when quoted
paragraphs.append(Paragraph(ParagraphId("d", 99), "demo", datetime.date(2009, 1, 1), "filler"))

report = gap_report(relevant, run_a, run_b, "recall@1", Corpus(paragraphs))
print("group sizes:", report.group_sizes)
for quantity in ("edit_distance", "lcs", "query_len"):
    groups = report.stats[quantity]
    test = report.tests.get(quantity)
    line = " vs ".join(
        f"{name} {s.mean:.1f} (std {s.std:.1f})" for name, s in sorted(groups.items())
    )
    verdict = f"p={test.p_value:.2g}" if test else "test skipped"
    print(f"  {quantity:13s} {line}  [{verdict}]")

# standalone Welch test
result = welch_t_test([1, 2, 3], [2, 3, 4])
print(f"\nwelch t={result.t_statistic:.5f} df={result.degrees_of_freedom:.0f} "
      f"p={result.p_value:.4f} significant@5%={result.significant_at_5pct}")

# verbatim-overlap spans of at least four tokens, longest first
a = "as a preliminary point the member states must comply with union law in that field"
b = "it follows that the member states must comply with union law when exercising powers"
print("\noverlap spans:", highlight_overlap(a, b))
