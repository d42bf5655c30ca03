import io

import pytest

from citeval.errors import ValidationError
from citeval.trec import RunRanking, iter_run_rows, read_run, write_run


def sample_run():
    run = RunRanking(run_tag="sys1")
    run.add("q1", [("d:2", 2.5), ("d:1", 1.0), ("d:3", 0.0)])
    run.add("q2", [("d:1", 0.25)])
    return run


def test_write_format_and_order():
    buf = io.StringIO()
    write_run(sample_run(), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "q1 Q0 d:2 1 2.500000 sys1"
    assert lines[-1] == "q2 Q0 d:1 1 0.250000 sys1"
    assert len(lines) == 4


def test_depth_truncates_export_only():
    buf = io.StringIO()
    write_run(sample_run(), buf, depth=1)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    assert all(" 1 " in line for line in lines)


def test_round_trip():
    buf = io.StringIO()
    write_run(sample_run(), buf)
    buf.seek(0)
    run = read_run(buf)
    assert run.run_tag == "sys1"
    assert run["q1"] == [("d:2", 2.5), ("d:1", 1.0), ("d:3", 0.0)]


def test_stream_rejects_noncontiguous_queries():
    text = "q1 Q0 d:1 1 1.0 t\nq2 Q0 d:1 1 1.0 t\nq1 Q0 d:2 2 0.5 t\n"
    with pytest.raises(ValidationError, match="not contiguous"):
        list(iter_run_rows(io.StringIO(text)))


def test_stream_rejects_bad_rank():
    text = "q1 Q0 d:1 1 1.0 t\nq1 Q0 d:2 3 0.5 t\n"
    with pytest.raises(ValidationError, match="rank 3"):
        list(iter_run_rows(io.StringIO(text)))


def test_stream_rejects_increasing_scores():
    text = "q1 Q0 d:1 1 1.0 t\nq1 Q0 d:2 2 2.0 t\n"
    with pytest.raises(ValidationError, match="increase"):
        list(iter_run_rows(io.StringIO(text)))


def test_stream_rejects_malformed_row():
    with pytest.raises(ValidationError, match="6 fields"):
        list(iter_run_rows(io.StringIO("q1 d:1 1 1.0\n")))


def test_duplicate_query_add_rejected():
    run = sample_run()
    with pytest.raises(ValidationError):
        run.add("q1", [("d:9", 1.0)])
