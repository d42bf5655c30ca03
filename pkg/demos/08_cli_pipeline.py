"""
The full command-line pipeline, end to end
==========================================

Generates a small synthetic citation corpus, then drives the installed
``citeval`` CLI through stats -> split -> index -> retrieve -> evaluate
-> gap. Every output is written next to this script's temp directory and
carries a .manifest.json sidecar with input digests.
"""
import json
import os
import random
import subprocess
import sys
import tempfile

workdir = tempfile.mkdtemp(prefix="citeval-demo-")
print("working in", workdir)

# -- synthesize a quote-bearing citation corpus ------------------------------
rng = random.Random(13)
phrases = [
    "the member states must comply with union law",
    "restrictions must be justified by an overriding reason",
    "the appeal lies on points of law only",
    "the right to have their case heard within a reasonable time",
]
filler = "regulation directive judgment article treaty market goods duty".split()

paragraphs, citations = [], []
by_year = {}
for d in range(30):
    year = 2010 + (d * 11) // 30
    celex = f"6{year}CJ{d:04d}"
    for num in range(1, rng.randint(2, 4) + 1):
        text = rng.choice(phrases) + " " + " ".join(rng.choice(filler) for _ in range(10))
        para = {"id": f"{celex}:{num}", "celex": celex, "number": num,
                "title": f"case {d}", "date": f"{year}-05-01", "text": text}
        paragraphs.append(para)
        by_year.setdefault(year, []).append(para)

for para in paragraphs:
    earlier = [p for y, ps in by_year.items() if y < int(para["date"][:4]) for p in ps]
    for cited in rng.sample(earlier, k=min(len(earlier), rng.randint(0, 2))):
        citations.append({"citing": para["id"], "cited": cited["id"]})
        para["text"] += " " + " ".join(cited["text"].split()[:8])

paragraphs_path = os.path.join(workdir, "paragraphs.jsonl")
citations_path = os.path.join(workdir, "citations.jsonl")
with open(paragraphs_path, "w") as fh:
    fh.writelines(json.dumps(p) + "\n" for p in paragraphs)
with open(citations_path, "w") as fh:
    seen = set()
    for c in citations:
        key = (c["citing"], c["cited"])
        if key not in seen:
            seen.add(key)
            fh.write(json.dumps(c) + "\n")


def cli(*args):
    command = [sys.executable, "-m", "citeval.cli", *args]
    print("\n$ citeval", " ".join(args))
    subprocess.run(command, check=True)


split_dir = os.path.join(workdir, "split")
index_path = os.path.join(workdir, "bm25.idx")
run_path = os.path.join(workdir, "bm25.run")
metrics_path = os.path.join(workdir, "metrics.json")

cli("stats", "--paragraphs", paragraphs_path, "--citations", citations_path,
    "--out", os.path.join(workdir, "stats.json"))
cli("split", "--paragraphs", paragraphs_path, "--citations", citations_path,
    "--train-end", "2016", "--valid-end", "2018", "--out", split_dir)
cli("index", "--method", "bm25", "--pool", split_dir, "--out", index_path)
cli("retrieve", "--index", index_path, "--queries", os.path.join(split_dir, "queries.jsonl"),
    "--threads", "4", "--out", run_path)
cli("evaluate", "--run", run_path, "--qrels", os.path.join(split_dir, "task.qrels"),
    "--out", metrics_path)

# a second lexical arm, then the overlap analysis of the gap between them
tfidf_index = os.path.join(workdir, "tfidf1.idx")
tfidf_run = os.path.join(workdir, "tfidf1.run")
cli("index", "--method", "tfidf1", "--pool", split_dir, "--vocab-k", "300", "--out", tfidf_index)
cli("retrieve", "--index", tfidf_index, "--queries", os.path.join(split_dir, "queries.jsonl"),
    "--out", tfidf_run)
cli("gap", "--run-a", run_path, "--run-b", tfidf_run,
    "--qrels", os.path.join(split_dir, "task.qrels"),
    "--metric", "recall@5", "--paragraphs", paragraphs_path,
    "--out", os.path.join(workdir, "gap"))

print("\nmetrics.json:")
print(open(metrics_path).read())
print("manifest of the run file:")
print(open(run_path + ".manifest.json").read())
