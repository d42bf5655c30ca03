"""Shared fixtures: tiny corpora and a synthetic citation dataset.

The synthetic dataset mimics the structure the pipeline is built for:
decisions spread over years, paragraphs built from a bank of recurring
formula phrases plus filler, and citations that quote part of the cited
paragraph. It is small enough for exhaustive oracles but rich enough to
exercise every pipeline stage, dense arms included.
"""
from __future__ import annotations

import datetime
import json
import random
import re

import numpy as np
import pytest

from citeval.corpus import CitationGraph, Corpus, Paragraph, ParagraphId

PHRASES = [
    "it is settled case law that the appeal lies on points of law only",
    "the court has consistently held that such restrictions must be justified",
    "the member states must comply with union law when exercising those powers",
    "the referring court must give full effect to that provision",
    "the principle of proportionality requires that measures do not exceed what is necessary",
    "the right of the persons accused to have their case heard within a reasonable time",
    "the protection of personal data enshrined in the charter of fundamental rights",
    "an overriding reason in the public interest may justify a restriction",
]

# broad filler vocabulary so document frequencies stay realistic
# (df << N/2; a tiny vocabulary would flip most IDF values negative)
_STEMS = (
    "regul direct judg paragraph articl treat commiss council parliam proceed "
    "interpret question refer nation legisl appeal decis measur oblig protect "
    "freedom market good servic work consum contract tax custom duti state aid "
    "compet agree border transport energ environ data privaci asylum visa trade"
).split()
_SUFFIXES = ("ation", "ement", "ing", "al", "ive", "or", "ure", "ance")
FILLER = [stem + suffix for stem in _STEMS for suffix in _SUFFIXES]


def make_paragraph(celex: str, number: int, year: int, text: str, title: str = "t") -> Paragraph:
    return Paragraph(ParagraphId(celex, number), title, datetime.date(year, 6, 15), text)


def synthetic_dataset(seed: int = 7, n_decisions: int = 40):
    """(corpus, graph) with quote-bearing citations, years 2008..2021."""
    rng = random.Random(seed)
    paragraphs: list[Paragraph] = []
    by_year: dict[int, list[Paragraph]] = {}
    for d in range(n_decisions):
        year = 2008 + (d * 14) // n_decisions
        celex = f"6{year}CJ{d:04d}"
        for num in range(1, rng.randint(2, 5) + 1):
            base = rng.choice(PHRASES)
            filler = " ".join(rng.choice(FILLER) for _ in range(rng.randint(5, 25)))
            para = make_paragraph(celex, num, year, f"{base} {filler}", title=f"case {d}")
            paragraphs.append(para)
            by_year.setdefault(year, []).append(para)

    edges: list[tuple[ParagraphId, ParagraphId]] = []
    texts: dict[ParagraphId, str] = {p.id: p.text for p in paragraphs}
    for para in paragraphs:
        year = para.date.year
        earlier = [p for y, ps in by_year.items() if y < year for p in ps]
        if not earlier or rng.random() < 0.25:
            continue
        for cited in rng.sample(earlier, k=min(len(earlier), rng.randint(1, 3))):
            edges.append((para.id, cited.id))
            if rng.random() < 0.7:
                # citing paragraphs tend to quote part of the cited text;
                # the tail is filler-heavy and so identifies the target
                quote = " ".join(cited.text.split()[-12:])
                texts[para.id] = texts[para.id] + " " + quote

    final = [Paragraph(p.id, p.title, p.date, texts[p.id]) for p in paragraphs]
    return Corpus(final), CitationGraph(set(edges))


def write_dataset(corpus: Corpus, graph: CitationGraph, directory) -> tuple[str, str]:
    paragraphs_path = str(directory / "paragraphs.jsonl")
    citations_path = str(directory / "citations.jsonl")
    with open(paragraphs_path, "w", encoding="utf-8") as fh:
        for p in corpus:
            fh.write(
                json.dumps(
                    {
                        "id": str(p.id),
                        "celex": p.id.celex,
                        "number": p.id.number,
                        "title": p.title,
                        "date": p.date.isoformat(),
                        "text": p.text,
                    }
                )
                + "\n"
            )
    with open(citations_path, "w", encoding="utf-8") as fh:
        for citing, cited in sorted(graph.edges):
            fh.write(json.dumps({"citing": str(citing), "cited": str(cited)}) + "\n")
    return paragraphs_path, citations_path


def hash_embedding(text: str, dim: int = 16) -> np.ndarray:
    """Deterministic bag-of-hashed-tokens embedding for synthetic tests."""
    vec = np.zeros(dim, dtype=np.float64)
    for token in text.lower().split():
        rng = np.random.default_rng(sum(token.encode()) * 2654435761 % (2**32))
        vec += rng.standard_normal(dim)
    norm = np.linalg.norm(vec)
    return (vec / norm if norm > 0 else vec).astype(np.float32)


@pytest.fixture(scope="session")
def dataset():
    return synthetic_dataset()


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL/SKIP line per criterion
# ---------------------------------------------------------------------------

_CRITERION = re.compile(r"test_(p\d+|s\d+)(?:_|$)")
_outcomes: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.match(report.nodeid.rsplit("::", 1)[-1])
    if not match or "test_acceptance" not in report.nodeid:
        return
    cid = match.group(1).upper()
    if report.when == "setup" and report.skipped:
        reason = ""
        if isinstance(report.longrepr, tuple):
            reason = report.longrepr[2]
        _outcomes[cid] = ("SKIP", reason)
    elif report.when == "call":
        _outcomes[cid] = ("PASS" if report.passed else "FAIL", "")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_outcomes, key=lambda c: (c[0], int(c[1:]))):
        outcome, reason = _outcomes[cid]
        line = f"{cid}: {outcome}"
        if reason:
            line += f" ({reason})"
        terminalreporter.write_line(line)
