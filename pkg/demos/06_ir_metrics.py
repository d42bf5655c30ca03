"""
Retrieval metrics
=================

Recall@k, nDCG@10 (binary gains), average precision and reciprocal rank
per query; reports macro-average over queries. AP and MRR are defined on
the exhaustive ranking, so every relevant document must appear.
"""
from citeval import (
    RunRanking,
    average_precision,
    evaluate_run,
    ndcg_at_k,
    recall_at_k,
    reciprocal_rank,
)

ranked = ["d:7", "d:2", "d:9", "d:1", "d:5", "d:3", "d:8", "d:4", "d:6"]
relevant = {"d:2", "d:4"}

print("ranking:", ranked)
print("relevant:", sorted(relevant))
for k in (1, 5):
    print(f"recall@{k} = {recall_at_k(ranked, relevant, k):.4f}")
print(f"ndcg@10  = {ndcg_at_k(ranked, relevant):.4f}")
print(f"AP       = {average_precision(ranked, relevant):.4f}")
print(f"RR       = {reciprocal_rank(ranked, relevant):.4f}")

# run-level macro averages: one relevant doc found at rank 1 and one
# query where both relevant docs sit lower
run = RunRanking(run_tag="demo")
run.add("q:1", [(d, float(len(ranked) - i)) for i, d in enumerate(ranked)])
run.add("q:2", [("d:1", 3.0), ("d:2", 2.0), ("d:3", 1.0)])
report = evaluate_run({"q:1": relevant, "q:2": {"d:1"}}, run, keep_per_query=True)

print("\nmacro-averaged report over", report.query_count, "queries:")
for field, value in report.as_dict().items():
    if field != "run_tag":
        print(f"  {field:10s} {value}")
