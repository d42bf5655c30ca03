import io
import json

import pytest

from citeval.corpus import (
    CitationGraph,
    ParagraphId,
    corpus_stats,
    ingest_citations,
    ingest_paragraphs,
    render_citations,
    render_paragraphs,
)
from citeval.errors import ValidationError

from conftest import synthetic_dataset, make_paragraph


def record(celex, number, date="2019-01-01", text="some text", title="t"):
    return json.dumps(
        {
            "id": f"{celex}:{number}",
            "celex": celex,
            "number": number,
            "title": title,
            "date": date,
            "text": text,
        }
    )


def test_paragraph_id_round_trip():
    pid = ParagraphId.parse("62013CJ0569:55")
    assert pid.celex == "62013CJ0569" and pid.number == 55
    assert str(pid) == "62013CJ0569:55"


def test_paragraph_id_rejects_garbage():
    for bad in ("noseparator", ":5", "a:", "a:x", "a:0", "a:-1"):
        with pytest.raises(ValidationError):
            ParagraphId.parse(bad)


def test_paragraph_id_ordering_is_numeric():
    assert ParagraphId("a", 2) < ParagraphId("a", 10)
    assert ParagraphId("a", 10) < ParagraphId("b", 1)


def test_ingest_two_valid_lines():
    src = io.StringIO(record("a", 1) + "\n" + record("a", 2) + "\n")
    corpus = ingest_paragraphs(src)
    assert len(corpus) == 2
    assert ParagraphId("a", 1) in corpus


def test_ingest_rejects_empty_text():
    src = io.StringIO(record("a", 1) + "\n" + record("a", 2, text="  ") + "\n")
    with pytest.raises(ValidationError, match=r"2: field 'text'"):
        ingest_paragraphs(src)


def test_ingest_rejects_duplicate_id():
    src = io.StringIO(record("a", 1) + "\n" + record("a", 1) + "\n")
    with pytest.raises(ValidationError, match="duplicate"):
        ingest_paragraphs(src)


def test_ingest_rejects_bad_date():
    src = io.StringIO(record("a", 1, date="2019-13-01") + "\n")
    with pytest.raises(ValidationError, match="date"):
        ingest_paragraphs(src)


def test_ingest_rejects_inconsistent_id():
    rec = json.loads(record("a", 1))
    rec["id"] = "a:2"
    with pytest.raises(ValidationError, match="celex/number"):
        ingest_paragraphs(io.StringIO(json.dumps(rec) + "\n"))


def test_ingest_reports_line_of_first_error():
    src = io.StringIO(record("a", 1) + "\n" + "not json\n")
    with pytest.raises(ValidationError, match=":2:"):
        ingest_paragraphs(src)


def test_citations_empty_stream():
    corpus = ingest_paragraphs(io.StringIO(record("a", 1) + "\n"))
    graph = ingest_citations(io.StringIO(""), corpus)
    assert len(graph) == 0


def test_citations_reject_unknown_endpoint():
    corpus = ingest_paragraphs(io.StringIO(record("a", 1) + "\n"))
    src = io.StringIO(json.dumps({"citing": "a:1", "cited": "b:9"}) + "\n")
    with pytest.raises(ValidationError, match="b:9"):
        ingest_citations(src, corpus)


def test_citations_reject_self_edge():
    corpus = ingest_paragraphs(io.StringIO(record("a", 1) + "\n"))
    src = io.StringIO(json.dumps({"citing": "a:1", "cited": "a:1"}) + "\n")
    with pytest.raises(ValidationError, match="self-edge"):
        ingest_citations(src, corpus)


def test_citations_collapse_duplicates_with_count():
    corpus = ingest_paragraphs(io.StringIO(record("a", 1) + "\n" + record("a", 2) + "\n"))
    line = json.dumps({"citing": "a:1", "cited": "a:2"}) + "\n"
    graph = ingest_citations(io.StringIO(line * 3), corpus)
    assert len(graph) == 1
    assert graph.duplicate_rows == 2


def test_render_round_trip():
    corpus, graph = synthetic_dataset(seed=5, n_decisions=10)
    buf = io.StringIO()
    render_paragraphs(corpus, buf)
    buf.seek(0)
    again = ingest_paragraphs(buf)
    assert list(again.ids()) == list(corpus.ids())
    assert all(again[pid].text == corpus[pid].text for pid in corpus.ids())

    cbuf = io.StringIO()
    render_citations(graph, cbuf)
    cbuf.seek(0)
    graph2 = ingest_citations(cbuf, again)
    assert graph2.edges == graph.edges


def test_hand_counted_stats():
    # 1 decision, 2 paragraphs of 3 and 5 words, 1 edge between them
    paragraphs = [
        make_paragraph("d", 1, 2019, "alpha beta gamma"),
        make_paragraph("d", 2, 2019, "one two three four five"),
    ]
    from citeval.corpus import Corpus

    corpus = Corpus(paragraphs)
    graph = CitationGraph({(ParagraphId("d", 2), ParagraphId("d", 1))})
    stats = corpus_stats(corpus, graph)
    assert stats.unique_decisions == 1
    assert stats.unique_paragraphs == 2
    assert stats.mean_paragraphs_per_decision.mean == 2.0
    assert stats.mean_words_per_paragraph.mean == 4.0
    assert stats.mean_inbound.mean == 1.0
    assert stats.mean_outbound.mean == 1.0
    assert stats.decision_level_outbound.mean == 1.0
    assert stats.citation_count == 1


def test_word_count_definitions_diverge_on_citation_text():
    from citeval.corpus import Corpus

    # "Article 3(6)" is 2 whitespace words but 3 alphanumeric tokens
    corpus = Corpus([make_paragraph("d", 1, 2019, "Article 3(6) applies")])
    stats = corpus_stats(corpus, CitationGraph(set()))
    assert stats.mean_whitespace_words_per_paragraph.mean == 3.0
    assert stats.mean_words_per_paragraph.mean == 4.0


def test_empty_graph_stats_report_absent_means():
    corpus = ingest_paragraphs(io.StringIO(record("a", 1) + "\n"))
    stats = corpus_stats(corpus, CitationGraph(set()))
    assert stats.citation_count == 0
    assert stats.mean_inbound is None
    assert "mean_inbound" not in stats.as_dict()


def test_degree_sums_equal_edge_count(dataset):
    corpus, graph = dataset
    total_out = sum(graph.out_degree(pid) for pid in corpus.ids())
    total_in = sum(graph.in_degree(pid) for pid in corpus.ids())
    assert total_out == total_in == len(graph)


def test_conditional_means_recover_edge_count(dataset):
    corpus, graph = dataset
    stats = corpus_stats(corpus, graph)
    n_with_in = sum(1 for pid in corpus.ids() if graph.in_degree(pid) >= 1)
    n_with_out = sum(1 for pid in corpus.ids() if graph.out_degree(pid) >= 1)
    assert stats.mean_inbound.mean * n_with_in == pytest.approx(len(graph))
    assert stats.mean_outbound.mean * n_with_out == pytest.approx(len(graph))
