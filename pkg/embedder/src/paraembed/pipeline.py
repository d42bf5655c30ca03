"""Corpus embedding pipeline: batched, resumable, failure-tolerant.

Reads paragraphs.jsonl, renders each record through the chosen template,
and streams batches through the backend. Batches are prefetched with a
bounded in-flight count, but results are written in order through a
single appender, so the output stays well-formed under interruption and
a rerun with ``resume`` only fetches what is missing. A batch that still
fails after exponential-backoff retries is recorded in a sidecar
failures file and skipped; dimension drift within a run aborts.
"""
from __future__ import annotations

import datetime
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .backends import AuthError, BackendError
from .config import BackendConfig, TEMPLATES
from .formats import FormatError, open_appender, scan_existing


class PipelineError(RuntimeError):
    pass


def render_record(record: dict, template: str) -> str:
    """What actually gets embedded: the text alone, or the full record."""
    if template == "text":
        return record["text"]
    if template == "full-record":
        return (
            f"CELEX: {record['celex']}\n"
            f"NUMBER: {record['number']}\n"
            f"TITLE: {record['title']}\n"
            f"DATE: {record['date']}\n"
            f"TEXT: {record['text']}"
        )
    raise PipelineError(f"unknown template {template!r}; use one of {TEMPLATES}")


def read_paragraphs(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PipelineError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
            for key in ("id", "text"):
                if key not in record:
                    raise PipelineError(f"{path}:{lineno}: missing field {key!r}")
            yield record


@dataclass
class EmbedReport:
    written: int
    skipped: int
    failed: int
    dim: int | None
    out_path: str


def _batches(items: list, size: int) -> Iterator[list]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


def embed_corpus(
    paragraphs_path: str,
    config: BackendConfig,
    out_path: str,
    fmt: str = "ndjson",
    template: str = "text",
    resume: bool = False,
    backend=None,
    in_flight: int = 2,
    sleeper: Callable[[float], None] = time.sleep,
) -> EmbedReport:
    """Embed every paragraph and write the canonical embedding file.

    ``backend`` may be injected (tests); otherwise it is built from the
    config. Already-written ids are skipped when ``resume`` is set; an
    existing output without ``resume`` is an error, never silently
    overwritten.
    """
    if backend is None:
        from .backends import make_backend

        backend = make_backend(config)

    existing: set[str] = set()
    dim: int | None = None
    if os.path.exists(out_path) and os.path.getsize(out_path) > 0:
        if not resume:
            raise PipelineError(f"{out_path} already exists; pass resume to continue it")
        existing, dim = scan_existing(out_path, fmt)

    records = list(read_paragraphs(paragraphs_path))
    seen_ids = set()
    for record in records:
        if record["id"] in seen_ids:
            raise PipelineError(f"duplicate paragraph id {record['id']}")
        seen_ids.add(record["id"])
    pending = [r for r in records if r["id"] not in existing]

    failures_path = out_path + ".failures.jsonl"
    appender = None
    written = failed = 0

    def call_with_retries(texts: list[str]) -> np.ndarray:
        delay = 1.0
        for attempt in range(config.max_retries + 1):
            try:
                return backend.embed(texts)
            except AuthError:
                raise
            except BackendError as exc:
                if attempt == config.max_retries:
                    raise
                sleeper(delay)
                delay *= 2.0
        raise AssertionError("unreachable")

    try:
        with ThreadPoolExecutor(max_workers=max(1, in_flight)) as pool:
            batch_list = list(_batches(pending, config.batch_size))

            def fetch(batch):
                texts = [render_record(r, template) for r in batch]
                try:
                    return call_with_retries(texts), None
                except AuthError:
                    raise
                except BackendError as exc:
                    return None, str(exc)

            for batch, (matrix, error) in zip(batch_list, pool.map(fetch, batch_list)):
                if error is not None:
                    failed += len(batch)
                    with open(failures_path, "a", encoding="utf-8") as fh:
                        for record in batch:
                            fh.write(json.dumps({"id": record["id"], "error": error}) + "\n")
                    continue
                if matrix.ndim != 2 or matrix.shape[0] != len(batch):
                    raise PipelineError(
                        f"backend returned shape {matrix.shape} for a batch of {len(batch)}"
                    )
                if dim is None:
                    dim = int(matrix.shape[1])
                elif matrix.shape[1] != dim:
                    raise PipelineError(
                        f"dimension drift within run: got {matrix.shape[1]}, expected {dim}"
                    )
                if appender is None:
                    appender = open_appender(out_path, fmt, dim)
                for record, vector in zip(batch, matrix):
                    appender.append(record["id"], vector)
                    written += 1
    except FormatError as exc:
        raise PipelineError(str(exc)) from exc
    finally:
        if appender is not None:
            appender.close()
        close = getattr(backend, "close", None)
        if close is not None:
            close()

    if pending and written == 0 and failed == len(pending):
        # nothing at all succeeded: treat as backend unavailability,
        # not as per-record failures
        raise PipelineError(
            f"backend produced no embeddings: all {failed} pending paragraphs failed "
            f"(see {failures_path})"
        )
    _write_manifest(out_path, config, fmt, template, dim, paragraphs_path)
    return EmbedReport(
        written=written,
        skipped=len(existing),
        failed=failed,
        dim=dim,
        out_path=out_path,
    )


def _write_manifest(
    out_path: str, config: BackendConfig, fmt: str, template: str, dim: int | None, source: str
) -> None:
    manifest = {
        "model_tag": config.model,
        "backend": config.kind,
        "format": fmt,
        "template": template,
        "dim": dim,
        "source": os.path.basename(source),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
