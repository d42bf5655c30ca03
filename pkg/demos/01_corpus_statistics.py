"""
Corpus ingestion and dataset statistics
=======================================

Paragraphs live in a JSONL file (one record per paragraph of a decision),
citations in a second JSONL file of citing->cited id pairs. This demo
builds both in memory, validates them, and prints the statistics report.
"""
import io
import json

from citeval import corpus_stats, ingest_citations, ingest_paragraphs

paragraph_records = [
    {"celex": "62015CJ0001", "number": 1, "date": "2015-03-01",
     "text": "The court has consistently held that restrictions must be justified."},
    {"celex": "62015CJ0001", "number": 2, "date": "2015-03-01",
     "text": "Member states must comply with union law when exercising retained powers."},
    {"celex": "62018CJ0002", "number": 1, "date": "2018-10-12",
     "text": "As the court has consistently held, restrictions must be justified "
             "by an overriding reason in the public interest."},
    {"celex": "62020CJ0003", "number": 1, "date": "2020-06-30",
     "text": "It follows that member states must comply with union law; see the case law cited."},
]
citation_records = [
    {"citing": "62018CJ0002:1", "cited": "62015CJ0001:1"},
    {"citing": "62020CJ0003:1", "cited": "62015CJ0001:2"},
    {"citing": "62020CJ0003:1", "cited": "62018CJ0002:1"},
]

paragraphs_jsonl = "\n".join(
    json.dumps({"id": f"{r['celex']}:{r['number']}", "title": "demo case", **r})
    for r in paragraph_records
)
citations_jsonl = "\n".join(json.dumps(r) for r in citation_records)

corpus = ingest_paragraphs(io.StringIO(paragraphs_jsonl))
graph = ingest_citations(io.StringIO(citations_jsonl), corpus)
print(f"ingested {len(corpus)} paragraphs, {len(graph)} citation edges\n")

# Degree means are conditional: only paragraphs with at least one
# inbound (outbound) edge enter the inbound (outbound) average.
stats = corpus_stats(corpus, graph)
print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
