"""Paragraph corpus and citation graph: ingest, validation, statistics.

The corpus is a set of dated paragraphs keyed by ``<celex>:<number>``
ids; the citation graph is a set of directed citing->cited edges between
those ids. Both are immutable after ingest and safe to share across
threads.
"""
from __future__ import annotations

import datetime
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import ValidationError
from .tokens import tokenize


@dataclass(frozen=True, order=True)
class ParagraphId:
    """Identity of one numbered paragraph of a decision.

    Ordering is (celex, number) with a numeric paragraph number; this is
    the tie-break order used by every ranking in the package.
    """

    celex: str
    number: int

    def __post_init__(self) -> None:
        if not self.celex or ":" in self.celex:
            raise ValidationError(f"bad celex {self.celex!r}")
        if self.number < 1:
            raise ValidationError(f"paragraph number must be >= 1, got {self.number}")

    @classmethod
    def parse(cls, s: str) -> "ParagraphId":
        celex, sep, num = s.rpartition(":")
        if not sep or not celex:
            raise ValidationError(f"paragraph id {s!r} is not of the form <celex>:<number>")
        try:
            number = int(num)
        except ValueError:
            raise ValidationError(f"paragraph id {s!r} has a non-integer number") from None
        return cls(celex, number)

    def __str__(self) -> str:
        return f"{self.celex}:{self.number}"


@dataclass(frozen=True)
class Paragraph:
    id: ParagraphId
    title: str
    date: datetime.date
    text: str


class Corpus:
    """Read-only mapping of ParagraphId -> Paragraph, in ingest order."""

    def __init__(self, paragraphs: Iterable[Paragraph]):
        self._by_id: dict[ParagraphId, Paragraph] = {}
        for p in paragraphs:
            if p.id in self._by_id:
                raise ValidationError(f"duplicate paragraph id {p.id}")
            self._by_id[p.id] = p

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Paragraph]:
        return iter(self._by_id.values())

    def __contains__(self, pid: ParagraphId) -> bool:
        return pid in self._by_id

    def __getitem__(self, pid: ParagraphId) -> Paragraph:
        try:
            return self._by_id[pid]
        except KeyError:
            raise KeyError(f"unknown paragraph id {pid}") from None

    def ids(self) -> Iterable[ParagraphId]:
        return self._by_id.keys()

    def get(self, pid: ParagraphId) -> Paragraph | None:
        return self._by_id.get(pid)


class CitationGraph:
    """Directed citing->cited edges; duplicates collapsed at ingest."""

    def __init__(
        self,
        edges: Iterable[tuple[ParagraphId, ParagraphId]],
        duplicate_edges: Counter | None = None,
    ):
        self.edges: frozenset[tuple[ParagraphId, ParagraphId]] = frozenset(edges)
        #: collapsed repeats per edge, kept so raw input-row counts stay
        #: reconstructible (some published figures count rows, not edges)
        self.duplicate_edges: Counter = duplicate_edges or Counter()
        self._out: dict[ParagraphId, set[ParagraphId]] = {}
        self._in: dict[ParagraphId, set[ParagraphId]] = {}
        for citing, cited in self.edges:
            self._out.setdefault(citing, set()).add(cited)
            self._in.setdefault(cited, set()).add(citing)

    @property
    def duplicate_rows(self) -> int:
        return sum(self.duplicate_edges.values())

    def __len__(self) -> int:
        return len(self.edges)

    def cited_by(self, citing: ParagraphId) -> frozenset[ParagraphId]:
        """Ids that ``citing`` points at (outbound neighbours)."""
        return frozenset(self._out.get(citing, ()))

    def citing_of(self, cited: ParagraphId) -> frozenset[ParagraphId]:
        """Ids that point at ``cited`` (inbound neighbours)."""
        return frozenset(self._in.get(cited, ()))

    def out_degree(self, pid: ParagraphId) -> int:
        return len(self._out.get(pid, ()))

    def in_degree(self, pid: ParagraphId) -> int:
        return len(self._in.get(pid, ()))


# ---------------------------------------------------------------------------
# Ingest / render
# ---------------------------------------------------------------------------

_PARAGRAPH_KEYS = ("id", "celex", "number", "title", "date", "text")


def _record(line: str, lineno: int, path: str) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise ValidationError(f"{path}:{lineno}: record is not a JSON object")
    return rec


def ingest_paragraphs(source: IO[str], path: str = "<paragraphs>") -> Corpus:
    """Parse a paragraphs.jsonl stream into a validated Corpus.

    Each line: ``{"id": "<celex>:<number>", "celex": str, "number": int,
    "title": str, "date": "YYYY-MM-DD", "text": str}``. The first bad
    line aborts with its line number and offending field.
    """
    paragraphs: list[Paragraph] = []
    seen: set[ParagraphId] = set()
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        rec = _record(line, lineno, path)
        for key in _PARAGRAPH_KEYS:
            if key not in rec:
                raise ValidationError(f"{path}:{lineno}: missing field {key!r}")
        if not isinstance(rec["number"], int) or isinstance(rec["number"], bool):
            raise ValidationError(f"{path}:{lineno}: field 'number' must be an integer")
        try:
            pid = ParagraphId(str(rec["celex"]), rec["number"])
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
        if str(pid) != rec["id"]:
            raise ValidationError(
                f"{path}:{lineno}: field 'id' is {rec['id']!r} but celex/number give {pid}"
            )
        try:
            date = datetime.date.fromisoformat(rec["date"])
        except (TypeError, ValueError):
            raise ValidationError(
                f"{path}:{lineno}: field 'date' {rec['date']!r} is not a valid YYYY-MM-DD date"
            ) from None
        text = rec["text"]
        if not isinstance(text, str) or not text.strip():
            raise ValidationError(f"{path}:{lineno}: field 'text' is empty")
        if pid in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate paragraph id {pid}")
        seen.add(pid)
        paragraphs.append(Paragraph(pid, str(rec["title"]), date, text))
    return Corpus(paragraphs)


def ingest_citations(source: IO[str], corpus: Corpus, path: str = "<citations>") -> CitationGraph:
    """Parse a citations.jsonl stream against an already-loaded corpus.

    Edges are validated (both endpoints known, no self-edges) and
    deduplicated; the collapsed-row count is kept on the graph.
    """
    edges: list[tuple[ParagraphId, ParagraphId]] = []
    seen: set[tuple[ParagraphId, ParagraphId]] = set()
    duplicates: Counter = Counter()
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        rec = _record(line, lineno, path)
        for key in ("citing", "cited"):
            if key not in rec:
                raise ValidationError(f"{path}:{lineno}: missing field {key!r}")
        try:
            citing = ParagraphId.parse(str(rec["citing"]))
            cited = ParagraphId.parse(str(rec["cited"]))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
        for endpoint, name in ((citing, "citing"), (cited, "cited")):
            if endpoint not in corpus:
                raise ValidationError(
                    f"{path}:{lineno}: {name} id {endpoint} does not exist in the corpus"
                )
        if citing == cited:
            raise ValidationError(f"{path}:{lineno}: self-edge on {citing}")
        edge = (citing, cited)
        if edge in seen:
            duplicates[edge] += 1
            continue
        seen.add(edge)
        edges.append(edge)
    return CitationGraph(edges, duplicate_edges=duplicates)


def render_paragraphs(corpus: Corpus, out: IO[str]) -> None:
    """Write the corpus back to paragraphs.jsonl (fixed key order)."""
    for p in corpus:
        rec = {
            "id": str(p.id),
            "celex": p.id.celex,
            "number": p.id.number,
            "title": p.title,
            "date": p.date.isoformat(),
            "text": p.text,
        }
        out.write(json.dumps(rec, ensure_ascii=False) + "\n")


def render_citations(graph: CitationGraph, out: IO[str]) -> None:
    for citing, cited in sorted(graph.edges):
        out.write(json.dumps({"citing": str(citing), "cited": str(cited)}) + "\n")


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float

    def as_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "std": self.std}


def _mean_std(values: list[int]) -> MeanStd | None:
    """Population mean/std; None for an empty sample (reported as absent)."""
    if not values:
        return None
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return MeanStd(mean, math.sqrt(var))


@dataclass(frozen=True)
class CorpusStats:
    unique_decisions: int
    unique_paragraphs: int
    decisions_in_citation_graph: int
    mean_paragraphs_per_decision: MeanStd | None
    mean_words_per_paragraph: MeanStd | None
    #: plain str.split() counting, the usual quick "word count"; tokenized
    #: counts run a few percent higher on citation-dense text
    mean_whitespace_words_per_paragraph: MeanStd | None
    citation_count: int
    duplicate_citation_rows: int
    mean_inbound: MeanStd | None
    mean_outbound: MeanStd | None
    decision_level_inbound: MeanStd | None
    decision_level_outbound: MeanStd | None

    def as_dict(self) -> dict:
        out: dict = {
            "unique_decisions": self.unique_decisions,
            "unique_paragraphs": self.unique_paragraphs,
            "decisions_in_citation_graph": self.decisions_in_citation_graph,
            "citation_count": self.citation_count,
            "duplicate_citation_rows": self.duplicate_citation_rows,
        }
        for name in (
            "mean_paragraphs_per_decision",
            "mean_words_per_paragraph",
            "mean_whitespace_words_per_paragraph",
            "mean_inbound",
            "mean_outbound",
            "decision_level_inbound",
            "decision_level_outbound",
        ):
            value: MeanStd | None = getattr(self, name)
            if value is not None:
                out[name] = value.as_dict()
        return out


def corpus_stats(corpus: Corpus, graph: CitationGraph, tokenizer=tokenize) -> CorpusStats:
    """Descriptive statistics of the corpus and its citation structure.

    Degree means are conditional: paragraphs (or decisions) with zero
    inbound/outbound edges are excluded from the respective mean, so
    ``mean * count(nonzero)`` recovers the edge count. Word counts use
    ``tokenizer``; every empty aggregate is reported absent rather
    than 0/0.
    """
    per_decision = Counter(p.id.celex for p in corpus)
    word_counts = [len(tokenizer(p.text)) for p in corpus]
    ws_counts = [len(p.text.split()) for p in corpus]

    in_deg: Counter[ParagraphId] = Counter()
    out_deg: Counter[ParagraphId] = Counter()
    dec_in: Counter[str] = Counter()
    dec_out: Counter[str] = Counter()
    graph_decisions: set[str] = set()
    for citing, cited in graph.edges:
        out_deg[citing] += 1
        in_deg[cited] += 1
        dec_out[citing.celex] += 1
        dec_in[cited.celex] += 1
        graph_decisions.add(citing.celex)
        graph_decisions.add(cited.celex)

    return CorpusStats(
        unique_decisions=len(per_decision),
        unique_paragraphs=len(corpus),
        decisions_in_citation_graph=len(graph_decisions),
        mean_paragraphs_per_decision=_mean_std(list(per_decision.values())),
        mean_words_per_paragraph=_mean_std(word_counts),
        mean_whitespace_words_per_paragraph=_mean_std(ws_counts),
        citation_count=len(graph),
        duplicate_citation_rows=graph.duplicate_rows,
        mean_inbound=_mean_std(list(in_deg.values())),
        mean_outbound=_mean_std(list(out_deg.values())),
        decision_level_inbound=_mean_std(list(dec_in.values())),
        decision_level_outbound=_mean_std(list(dec_out.values())),
    )
