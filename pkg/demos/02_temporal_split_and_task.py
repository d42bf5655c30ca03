"""
Temporal splitting and the frozen retrieval task
================================================

Paragraphs are assigned to train / valid / test by decision year. Edges
between two test paragraphs are purged (the test period must not depend
on itself), and each remaining test paragraph with outbound citations
becomes one query: its relevant set is what it cites, its candidate
pool is every train+valid paragraph.
"""
import datetime

from citeval import (
    CitationGraph,
    Corpus,
    Paragraph,
    ParagraphId,
    SplitBoundaries,
    build_task,
    temporal_split,
)


def para(celex, number, year, text):
    return Paragraph(ParagraphId(celex, number), "demo", datetime.date(year, 1, 15), text)


corpus = Corpus(
    [
        para("old", 1, 2010, "first principle"),
        para("old", 2, 2014, "second principle"),
        para("mid", 1, 2017, "validation era paragraph"),
        para("new", 1, 2019, "test paragraph citing the past"),
        para("new", 2, 2020, "test paragraph citing only the test period"),
    ]
)
edge = lambda a, b: (ParagraphId.parse(a), ParagraphId.parse(b))
graph = CitationGraph(
    {
        edge("mid:1", "old:1"),
        edge("new:1", "old:2"),
        edge("new:1", "mid:1"),
        edge("new:2", "new:1"),  # test->test: purged
    }
)

splits = temporal_split(corpus, graph, SplitBoundaries(train_end_year=2016, valid_end_year=2018))
print("train:", sorted(map(str, splits.train)))
print("valid:", sorted(map(str, splits.valid)))
print("test :", sorted(map(str, splits.test)))
print("purged test->test edges:", [(str(a), str(b)) for a, b in splits.purged_edges])
print("orphaned test paragraphs:", sorted(map(str, splits.orphaned_test)))

task = build_task(splits, graph)
print(f"\n{len(task.queries)} queries over {len(task.candidates)} candidates, "
      f"{task.dropped_queries} dropped (all citations purged)")
for qid, relevant in task.queries:
    print(f"  query {qid} -> relevant {sorted(map(str, relevant))}")
