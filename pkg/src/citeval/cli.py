"""Command-line pipelines: stats, split, index, retrieve, evaluate, gap,
highlight, convert-embeddings.

Every output file gets a sidecar ``<file>.manifest.json`` recording the
command, input digests, tokenizer rule and parameters. Output files
themselves carry no timestamps: reruns on identical inputs are
byte-identical, whatever ``--threads`` says.

Exit codes: 0 success, 1 validation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bm25 import Bm25Index, bm25_score_all, build_bm25_index
from .corpus import Corpus, ParagraphId, corpus_stats, ingest_citations, ingest_paragraphs
from .dense import read_embeddings, write_ndjson, write_packed
from .errors import ValidationError
from .gap import (
    gap_report_from_partition,
    highlight_overlap,
    parse_metric_spec,
    partition_from_metrics,
    stream_per_query_recall,
    write_ngram_curves,
)
from .manifest import read_manifest, write_manifest
from .metrics import evaluate_run_file, write_per_query_csv
from .snapshot import load_index, save_bm25, save_tfidf
from .splits import (
    SplitBoundaries,
    build_task,
    read_qrels,
    split_counts,
    temporal_split,
    write_qrels,
)
from .tfidf import TfidfIndex, build_tfidf_vocab
from .tokens import TOKENIZER_ID, WORD_PUNCT_TOKENIZER_ID, tokenize, tokenize_word_punct
from .trec import read_run_tag

PROFILE_TOKENIZERS = {
    "alnum": (tokenize, TOKENIZER_ID),
    "word-punct": (tokenize_word_punct, WORD_PUNCT_TOKENIZER_ID),
}

DEFAULT_THREADS = min(8, os.cpu_count() or 1)


def _load_corpus(path: str) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest_paragraphs(fh, path)


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.paragraphs)
    with open(args.citations, "r", encoding="utf-8") as fh:
        graph = ingest_citations(fh, corpus, args.citations)
    payload = corpus_stats(corpus, graph).as_dict()
    if args.out:
        _write_json(payload, args.out)
        write_manifest(args.out, args.argv, [args.paragraphs, args.citations], {})
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------------------
# split
# ---------------------------------------------------------------------------


def cmd_split(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.paragraphs)
    with open(args.citations, "r", encoding="utf-8") as fh:
        graph = ingest_citations(fh, corpus, args.citations)
    boundaries = SplitBoundaries(args.train_end, args.valid_end)
    splits = temporal_split(corpus, graph, boundaries)
    task = build_task(splits, graph)

    os.makedirs(args.out, exist_ok=True)
    inputs = [args.paragraphs, args.citations]
    params = {"train_end": args.train_end, "valid_end": args.valid_end}

    def emit_jsonl(name: str, ids) -> None:
        path = os.path.join(args.out, name)
        with open(path, "w", encoding="utf-8") as fh:
            for pid in sorted(ids):
                para = corpus[pid]
                fh.write(
                    json.dumps(
                        {
                            "id": str(para.id),
                            "celex": para.id.celex,
                            "number": para.id.number,
                            "title": para.title,
                            "date": para.date.isoformat(),
                            "text": para.text,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        write_manifest(path, args.argv, inputs, params)

    emit_jsonl("train.jsonl", splits.train)
    emit_jsonl("valid.jsonl", splits.valid)
    emit_jsonl("queries.jsonl", [qid for qid, _ in task.queries])

    qrels_path = os.path.join(args.out, "task.qrels")
    with open(qrels_path, "w", encoding="utf-8") as fh:
        write_qrels(task, fh)
    write_manifest(qrels_path, args.argv, inputs, params)

    report = {
        "boundaries": params,
        "splits": split_counts(splits, graph),
        "queries": len(task.queries),
        "total_relevant": task.total_relevant(),
        "dropped_queries": task.dropped_queries,
        "duplicate_citation_rows": graph.duplicate_rows,
    }
    report_path = os.path.join(args.out, "split-report.json")
    _write_json(report, report_path)
    write_manifest(report_path, args.argv, inputs, params)
    print(
        f"split: {report['splits']['train']['paragraphs']} train / "
        f"{report['splits']['valid']['paragraphs']} valid / "
        f"{report['splits']['test']['paragraphs']} test paragraphs, "
        f"{len(task.queries)} queries, {task.dropped_queries} dropped, "
        f"{report['splits']['purged_edges']} edges purged"
    )
    return 0


# ---------------------------------------------------------------------------
# index
# ---------------------------------------------------------------------------


def _pool_paths(pool_dir: str) -> tuple[str, str]:
    train = os.path.join(pool_dir, "train.jsonl")
    valid = os.path.join(pool_dir, "valid.jsonl")
    for path in (train, valid):
        if not os.path.exists(path):
            raise ValidationError(f"pool directory {pool_dir} is missing {os.path.basename(path)}")
    return train, valid


def cmd_index(args: argparse.Namespace) -> int:
    train_path, valid_path = _pool_paths(args.pool)
    train = _load_corpus(train_path)
    valid = _load_corpus(valid_path)
    pool = list(train) + list(valid)
    inputs = [train_path, valid_path]

    if args.method == "bm25":
        index = build_bm25_index(pool, k1=args.k1, b=args.b)
        with open(args.out, "wb") as fh:
            save_bm25(index, fh, tokenizer_id=TOKENIZER_ID)
        params = {"method": "bm25", "k1": args.k1, "b": args.b, "n_docs": index.n_docs}
    else:
        n = 1 if args.method == "tfidf1" else 2
        vocab = build_tfidf_vocab(train, n=n, k=args.vocab_k)
        index = TfidfIndex(vocab, pool)
        with open(args.out, "wb") as fh:
            save_tfidf(index, fh, tokenizer_id=TOKENIZER_ID)
        params = {"method": args.method, "n": n, "vocab_k": args.vocab_k, "n_docs": index.n_docs}
    write_manifest(args.out, args.argv, inputs, params)
    print(f"index: {args.method} over {params['n_docs']} documents -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# retrieve
# ---------------------------------------------------------------------------


def _emit_run(
    out_path: str,
    query_order: list[str],
    rank_one,
    doc_id_strs: list[str],
    run_tag: str,
    depth: int | None,
    threads: int,
    skip_self: bool,
) -> None:
    """Score queries in parallel, write rows in query order.

    Submission is windowed so at most a few scored-but-unwritten
    queries are in memory; output order (and content) is independent
    of the worker count.
    """
    workers = max(1, threads)
    window = workers * 2
    pending: deque = deque()
    queries = iter(query_order)
    with open(out_path, "w", encoding="utf-8") as out:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for qid in itertools.islice(queries, window):
                pending.append((qid, pool.submit(rank_one, qid)))
            while pending:
                qid, future = pending.popleft()
                order, scores = future.result()
                rows = 0
                lines: list[str] = []
                for i in order:
                    doc = doc_id_strs[i]
                    if skip_self and doc == qid:
                        continue
                    rows += 1
                    lines.append(f"{qid} Q0 {doc} {rows} {scores[i]:.6f} {run_tag}\n")
                    if depth is not None and rows >= depth:
                        break
                out.writelines(lines)
                nxt = next(queries, None)
                if nxt is not None:
                    pending.append((nxt, pool.submit(rank_one, nxt)))


def cmd_retrieve(args: argparse.Namespace) -> int:
    lexical = args.index is not None
    dense = args.embeddings is not None
    if lexical == dense:
        raise ValidationError("use exactly one of --index or --embeddings")
    depth = args.depth
    if depth is not None and depth < 1:
        raise ValidationError(f"--depth must be >= 1, got {depth}")

    if lexical:
        if not args.queries:
            raise ValidationError("--queries is required with --index")
        with open(args.index, "rb") as fh:
            index, header = load_index(fh)
        if header.get("tokenizer") not in ("", None, TOKENIZER_ID):
            raise ValidationError(
                f"index tokenizer {header.get('tokenizer')!r} does not match "
                f"this tool's {TOKENIZER_ID!r}"
            )
        queries = _load_corpus(args.queries)
        tokens_by_qid = {str(p.id): tokenize(p.text) for p in queries}
        query_order = sorted(tokens_by_qid)
        doc_id_strs = [str(pid) for pid in index.doc_ids]
        if args.run_tag:
            run_tag = args.run_tag
        elif header.get("kind") == "tfidf":
            run_tag = f"tfidf{header.get('n')}"
        else:
            run_tag = header.get("kind", "lexical")
        inputs = [args.index, args.queries]
        params = dict(header)
        params.update({"depth": depth, "idf_floor0": args.idf_floor0})

        if isinstance(index, Bm25Index):
            def rank_one(qid: str):
                scores = bm25_score_all(index, tokens_by_qid[qid], idf_floor0=args.idf_floor0)
                return np.argsort(-scores, kind="stable"), scores
        else:
            if args.idf_floor0:
                raise ValidationError("--idf-floor0 applies only to BM25 indexes")
            def rank_one(qid: str):
                scores = index.score_all(tokens_by_qid[qid])
                return np.argsort(-scores, kind="stable"), scores
    else:
        if args.queries_embeddings is None:
            raise ValidationError("--queries-embeddings is required with --embeddings")
        if args.idf_floor0:
            raise ValidationError("--idf-floor0 applies only to BM25 indexes")
        store = read_embeddings(args.embeddings)
        query_store = read_embeddings(args.queries_embeddings)
        if store.dim != query_store.dim:
            raise ValidationError(
                f"candidate embeddings have dim {store.dim} but query embeddings {query_store.dim}"
            )
        from .dense import DenseRanker

        ranker = DenseRanker(store)
        doc_id_strs = list(ranker.doc_ids)
        query_order = sorted(query_store.ids, key=ParagraphId.parse)
        run_tag = args.run_tag or store.model_tag or "dense"
        inputs = [args.embeddings, args.queries_embeddings]
        params = {"model_tag": store.model_tag, "dim": store.dim, "depth": depth}

        def rank_one(qid: str):
            scores = ranker.score_all(query_store.vector(qid))
            return np.argsort(-scores, kind="stable"), scores

    _emit_run(
        args.out,
        query_order,
        rank_one,
        doc_id_strs,
        run_tag,
        depth,
        args.threads,
        skip_self=not lexical,
    )
    write_manifest(args.out, args.argv, inputs, {**params, "run_tag": run_tag})
    print(f"retrieve: {len(query_order)} queries -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _check_tokenizer_compatibility(run_path: str, qrels_path: str) -> None:
    run_m = read_manifest(run_path)
    qrels_m = read_manifest(qrels_path)
    if run_m is None or qrels_m is None:
        return
    run_tok, qrels_tok = run_m.get("tokenizer"), qrels_m.get("tokenizer")
    if run_tok and qrels_tok and run_tok != qrels_tok:
        raise ValidationError(
            f"run was produced under tokenizer {run_tok!r} but qrels under {qrels_tok!r}; "
            "refusing to compare mixed-tokenizer artifacts"
        )


def cmd_evaluate(args: argparse.Namespace) -> int:
    _check_tokenizer_compatibility(args.run, args.qrels)
    with open(args.qrels, "r", encoding="utf-8") as fh:
        relevant = read_qrels(fh, args.qrels)
    if not relevant:
        raise ValidationError(f"{args.qrels}: no relevance judgments")
    run_tag = read_run_tag(args.run)
    with open(args.run, "r", encoding="utf-8") as fh:
        report = evaluate_run_file(
            relevant, fh, run_tag=run_tag, path=args.run, keep_per_query=bool(args.per_query)
        )
    _write_json(report.as_dict(), args.out)
    write_manifest(args.out, args.argv, [args.run, args.qrels], {"run_tag": run_tag})
    if args.per_query:
        with open(args.per_query, "w", encoding="utf-8") as fh:
            write_per_query_csv(report, fh)
        write_manifest(args.per_query, args.argv, [args.run, args.qrels], {"run_tag": run_tag})
    for field, value in report.as_dict().items():
        if field not in ("run_tag",):
            print(f"{field}: {value}")
    return 0


# ---------------------------------------------------------------------------
# gap
# ---------------------------------------------------------------------------


def cmd_gap(args: argparse.Namespace) -> int:
    k = parse_metric_spec(args.metric)
    with open(args.qrels, "r", encoding="utf-8") as fh:
        relevant = read_qrels(fh, args.qrels)
    if not relevant:
        raise ValidationError(f"{args.qrels}: no relevance judgments")
    with open(args.run_a, "r", encoding="utf-8") as fh:
        recall_a = stream_per_query_recall(relevant, fh, k, args.run_a)
    with open(args.run_b, "r", encoding="utf-8") as fh:
        recall_b = stream_per_query_recall(relevant, fh, k, args.run_b)
    partition = partition_from_metrics(args.metric, recall_a, recall_b)
    corpus = _load_corpus(args.paragraphs)
    tokenizer, tokenizer_id = PROFILE_TOKENIZERS[args.profile_tokenizer]
    report = gap_report_from_partition(
        partition,
        relevant,
        corpus,
        run_a_tag=read_run_tag(args.run_a) or "A",
        run_b_tag=read_run_tag(args.run_b) or "B",
        tokenizer=tokenizer,
    )

    os.makedirs(args.out, exist_ok=True)
    inputs = [args.run_a, args.run_b, args.qrels, args.paragraphs]
    params = {"metric": args.metric, "profile_tokenizer": tokenizer_id}
    report_path = os.path.join(args.out, "gap-report.json")
    _write_json(report.as_dict(), report_path)
    write_manifest(report_path, args.argv, inputs, params)
    curves_path = os.path.join(args.out, "ngram-curves.csv")
    with open(curves_path, "w", encoding="utf-8") as fh:
        write_ngram_curves(report, fh)
    write_manifest(curves_path, args.argv, inputs, params)
    sizes = report.group_sizes
    print(
        f"gap({args.metric}): both_perfect={sizes['both_perfect']} "
        f"a_only={sizes['a_only']} b_only={sizes['b_only']} neither={sizes['neither']}"
    )
    for notice in report.notices:
        print(f"notice: {notice}")
    return 0


# ---------------------------------------------------------------------------
# highlight
# ---------------------------------------------------------------------------


def cmd_highlight(args: argparse.Namespace) -> int:
    if args.pair:
        if not args.paragraphs:
            raise ValidationError("--pair requires --paragraphs")
        corpus = _load_corpus(args.paragraphs)
        try:
            text_a = corpus[ParagraphId.parse(args.pair[0])].text
            text_b = corpus[ParagraphId.parse(args.pair[1])].text
        except KeyError as exc:
            raise ValidationError(str(exc)) from None
    elif args.texts:
        with open(args.texts[0], "r", encoding="utf-8") as fh:
            text_a = fh.read()
        with open(args.texts[1], "r", encoding="utf-8") as fh:
            text_b = fh.read()
    else:
        raise ValidationError("use --pair A B (with --paragraphs) or --texts FILE_A FILE_B")

    spans = highlight_overlap(text_a, text_b, min_length=args.min_length)
    tokens_a = tokenize(text_a)
    if args.json:
        payload = [
            {
                "start_a": sa,
                "start_b": sb,
                "length": length,
                "tokens": tokens_a[sa : sa + length],
            }
            for sa, sb, length in spans
        ]
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        if not spans:
            print("no common runs of length >=", args.min_length)
        for sa, sb, length in spans:
            excerpt = " ".join(tokens_a[sa : sa + length])
            print(f"a[{sa}:{sa + length}] = b[{sb}:{sb + length}] len={length}: {excerpt}")
    return 0


# ---------------------------------------------------------------------------
# convert-embeddings
# ---------------------------------------------------------------------------


def cmd_convert_embeddings(args: argparse.Namespace) -> int:
    store = read_embeddings(args.src)
    records = list(zip(store.ids, store.matrix))
    if args.format == "ndjson":
        with open(args.out, "w", encoding="utf-8") as fh:
            write_ndjson(records, fh)
    else:
        with open(args.out, "wb") as fh:
            write_packed(records, fh, store.dim)
    write_manifest(
        args.out,
        args.argv,
        [args.src],
        {"format": args.format, "dim": store.dim, "records": len(store)},
        tokenizer_id="",
    )
    print(f"convert-embeddings: {len(store)} records of dim {store.dim} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citeval",
        description="Retrieval evaluation over citation-linked paragraph corpora.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus and citation-graph statistics")
    p.add_argument("--paragraphs", required=True)
    p.add_argument("--citations", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="temporal split, purge, and task freeze")
    p.add_argument("--paragraphs", required=True)
    p.add_argument("--citations", required=True)
    p.add_argument("--train-end", type=int, required=True, dest="train_end")
    p.add_argument("--valid-end", type=int, required=True, dest="valid_end")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("index", help="build a lexical index over the candidate pool")
    p.add_argument("--method", choices=("bm25", "tfidf1", "tfidf2"), required=True)
    p.add_argument("--pool", required=True, help="split output directory (train.jsonl, valid.jsonl)")
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-k", type=int, default=5000, dest="vocab_k")
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank candidates for every query")
    p.add_argument("--index", help="lexical index snapshot")
    p.add_argument("--queries", help="queries.jsonl (paragraph records)")
    p.add_argument("--embeddings", help="candidate-pool embedding file")
    p.add_argument("--queries-embeddings", dest="queries_embeddings", help="query embedding file")
    p.add_argument("--depth", type=int, default=None, help="exported rows per query (default: all)")
    p.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    p.add_argument("--run-tag", dest="run_tag")
    p.add_argument("--idf-floor0", action="store_true", dest="idf_floor0",
                   help="clamp negative BM25 IDF values to zero")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", help="score a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--per-query", dest="per_query", help="optional per-query CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gap", help="overlap analysis of two runs' performance gap")
    p.add_argument("--run-a", required=True, dest="run_a")
    p.add_argument("--run-b", required=True, dest="run_b")
    p.add_argument("--qrels", required=True)
    p.add_argument("--metric", default="recall@5", help="per-query metric, e.g. recall@5")
    p.add_argument("--paragraphs", required=True)
    p.add_argument("--profile-tokenizer", choices=sorted(PROFILE_TOKENIZERS),
                   default="alnum", dest="profile_tokenizer",
                   help="word rule for the overlap profiles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("highlight", help="verbatim-overlap spans between two texts")
    p.add_argument("--paragraphs")
    p.add_argument("--pair", nargs=2, metavar=("ID_A", "ID_B"))
    p.add_argument("--texts", nargs=2, metavar=("FILE_A", "FILE_B"))
    p.add_argument("--min-length", type=int, default=4, dest="min_length")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_highlight)

    p = sub.add_parser("convert-embeddings", help="convert between embedding formats")
    p.add_argument("--in", required=True, dest="src", metavar="SRC")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("ndjson", "packed"), required=True)
    p.set_defaults(func=cmd_convert_embeddings)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
