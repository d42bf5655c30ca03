"""paraembed CLI: turn a paragraphs.jsonl into a canonical embedding file.

Remote backends send paragraph text to a third-party service; that is
opt-in via --allow-remote. Exit codes: 0 success (even with recorded
per-record failures), 1 validation/backend error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys

from .backends import AuthError, BackendError
from .config import BACKEND_KINDS, TEMPLATES, BackendConfig
from .pipeline import PipelineError, embed_corpus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraembed",
        description="Produce canonical embedding files from a paragraph corpus.",
    )
    parser.add_argument("--paragraphs", required=True, help="paragraphs.jsonl input")
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--format", choices=("ndjson", "packed"), default="ndjson")
    parser.add_argument("--backend", choices=BACKEND_KINDS, default="local-model")
    parser.add_argument("--model", required=True, help="model name, path, or API model id")
    parser.add_argument("--batch", type=int, default=32, dest="batch")
    parser.add_argument("--max-retries", type=int, default=3, dest="max_retries")
    parser.add_argument("--rate-limit", type=int, default=None, dest="rate_limit",
                        help="requests per minute")
    parser.add_argument("--in-flight", type=int, default=2, dest="in_flight",
                        help="batches fetched concurrently (writes stay ordered)")
    parser.add_argument("--template", choices=TEMPLATES, default="text",
                        help="embed the text alone or the full record")
    parser.add_argument("--resume", action="store_true",
                        help="continue an interrupted output file")
    parser.add_argument("--api-base", default="", dest="api_base")
    parser.add_argument("--api-key-env", default="PARAEMBED_API_KEY", dest="api_key_env")
    parser.add_argument("--allow-remote", action="store_true", dest="allow_remote",
                        help="acknowledge that paragraph text leaves this machine")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend == "remote-api" and not args.allow_remote:
        print(
            "error: remote-api sends corpus text to an external service; "
            "pass --allow-remote to acknowledge",
            file=sys.stderr,
        )
        return 1
    try:
        config = BackendConfig(
            kind=args.backend,
            model=args.model,
            batch_size=args.batch,
            max_retries=args.max_retries,
            rate_limit_per_minute=args.rate_limit,
            api_base=args.api_base,
            api_key_env=args.api_key_env,
        )
        report = embed_corpus(
            args.paragraphs,
            config,
            args.out,
            fmt=args.format,
            template=args.template,
            resume=args.resume,
            in_flight=args.in_flight,
        )
    except (ValueError, PipelineError, AuthError, BackendError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"embedded {report.written} paragraphs (dim {report.dim}) -> {report.out_path}; "
        f"{report.skipped} already present, {report.failed} recorded as failures"
    )
    if report.failed:
        print(f"failure list: {report.out_path}.failures.jsonl", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
