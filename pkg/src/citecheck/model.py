"""Core data types shared by every pipeline stage.

A reference flows through the pipeline as a single :class:`Citation` value
that each stage enriches: the extractor fills ``raw_text`` and ``bboxes``,
the recognizer adds ``spans``/``fields``/``title``, and the matcher attaches
a :class:`MatchResult`.  Stages return new values instead of mutating their
input, so citations can safely cross worker boundaries.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from .errors import MissingField, UnknownField


class FieldTag(str, Enum):
    """Closed set of bibliographic field tags emitted by labelers."""

    AUTHOR = "author"
    BOOKTITLE = "booktitle"
    COLLABORATION = "collaboration"
    DATE = "date"
    EDITOR = "editor"
    INSTITUTION = "institution"
    ISSUE = "issue"
    JOURNAL = "journal"
    LOCATION = "location"
    NOTE = "note"
    PAGES = "pages"
    PUBLISHER = "publisher"
    PUBNUM = "pubnum"
    SERIES = "series"
    TECH = "tech"
    TITLE = "title"
    VOLUME = "volume"
    WEB = "web"
    OTHER = "other"


#: The 18 in-field tags (everything except ``other``).
FIELD_TAGS = tuple(t for t in FieldTag if t is not FieldTag.OTHER)


class CitationStatus(str, Enum):
    EXTRACTED = "extracted"
    RECOGNIZED = "recognized"
    VERIFIED = "verified"
    UNVERIFIABLE = "unverifiable"


#: Legal forward transitions; used to assert monotone progress.
STATUS_ORDER = {
    CitationStatus.EXTRACTED: 0,
    CitationStatus.RECOGNIZED: 1,
    CitationStatus.UNVERIFIABLE: 1,
    CitationStatus.VERIFIED: 2,
}


class Stage(str, Enum):
    EXTRACTOR = "extractor"
    RECOGNIZER = "recognizer"
    MATCHER = "matcher"
    TOTAL = "total"


@dataclass(frozen=True)
class BoundingBox:
    """Page-anchored rectangle in PDF user space (points, y grows upward)."""

    page_index: int
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.page_index < 0:
            raise ValueError(f"page_index must be >= 0, got {self.page_index}")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(
                f"degenerate box: ({self.x0}, {self.y0}, {self.x1}, {self.y1})"
            )

    def to_record(self) -> dict[str, Any]:
        return {
            "page_index": self.page_index,
            "x0": self.x0,
            "y0": self.y0,
            "x1": self.x1,
            "y1": self.y1,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "BoundingBox":
        extra = set(rec) - {"page_index", "x0", "y0", "x1", "y1"}
        if extra:
            raise UnknownField(f"unknown bounding box keys: {sorted(extra)}")
        try:
            return cls(
                page_index=int(rec["page_index"]),
                x0=float(rec["x0"]),
                y0=float(rec["y0"]),
                x1=float(rec["x1"]),
                y1=float(rec["y1"]),
            )
        except KeyError as e:
            raise MissingField(f"bounding box missing key {e}") from e


@dataclass(frozen=True)
class LabeledSpan:
    """A contiguous character span of ``raw_text`` carrying one field tag."""

    tag: FieldTag
    start_char: int
    end_char: int
    text: str

    def __post_init__(self) -> None:
        if not (0 <= self.start_char < self.end_char):
            raise ValueError(
                f"bad span offsets [{self.start_char}, {self.end_char})"
            )

    def to_record(self) -> dict[str, Any]:
        return {
            "tag": self.tag.value,
            "start_char": self.start_char,
            "end_char": self.end_char,
            "text": self.text,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "LabeledSpan":
        extra = set(rec) - {"tag", "start_char", "end_char", "text"}
        if extra:
            raise UnknownField(f"unknown span keys: {sorted(extra)}")
        try:
            return cls(
                tag=FieldTag(rec["tag"]),
                start_char=int(rec["start_char"]),
                end_char=int(rec["end_char"]),
                text=str(rec["text"]),
            )
        except KeyError as e:
            raise MissingField(f"span missing key {e}") from e


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one citation title against one or more databases.

    ``matched=True`` requires ``score`` at or above the threshold in force and
    a non-empty ``db_name``.  On a failed match the best score is still
    recorded but ``matched_id``/``matched_title`` stay empty: the toolkit
    never names a "nearest miss" as if it were the cited work.
    """

    matched: bool
    score: float
    db_name: str = ""
    matched_id: str = ""
    matched_title: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score out of range: {self.score}")
        if self.matched and not self.db_name:
            raise ValueError("matched result requires a db_name")
        if not self.matched and (self.matched_id or self.matched_title):
            raise ValueError("unmatched result must not carry an entry id/title")

    def to_record(self) -> dict[str, Any]:
        return {
            "matched": self.matched,
            "score": self.score,
            "db_name": self.db_name,
            "matched_id": self.matched_id,
            "matched_title": self.matched_title,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "MatchResult":
        extra = set(rec) - {"matched", "score", "db_name", "matched_id", "matched_title"}
        if extra:
            raise UnknownField(f"unknown match keys: {sorted(extra)}")
        try:
            return cls(
                matched=bool(rec["matched"]),
                score=float(rec["score"]),
                db_name=str(rec.get("db_name", "")),
                matched_id=str(rec.get("matched_id", "")),
                matched_title=str(rec.get("matched_title", "")),
            )
        except KeyError as e:
            raise MissingField(f"match missing key {e}") from e


@dataclass(frozen=True)
class StageTiming:
    """Wall-clock measurement for one pipeline stage."""

    stage: Stage
    elapsed_ms: float
    unit_count: int = 0

    def __post_init__(self) -> None:
        if self.elapsed_ms < 0:
            raise ValueError("elapsed_ms must be nonnegative")

    def to_record(self) -> dict[str, Any]:
        return {
            "stage": self.stage.value,
            "elapsed_ms": self.elapsed_ms,
            "unit_count": self.unit_count,
        }


_CITATION_KEYS = frozenset(
    {"raw_text", "bboxes", "spans", "title", "fields", "match", "status"}
)


@dataclass
class Citation:
    """The unified per-reference record flowing through all stages."""

    raw_text: str
    bboxes: list[BoundingBox] = field(default_factory=list)
    spans: list[LabeledSpan] = field(default_factory=list)
    title: str = ""
    fields: dict[FieldTag, str] = field(default_factory=dict)
    match: MatchResult | None = None
    status: CitationStatus = CitationStatus.EXTRACTED

    def replace(self, **changes: Any) -> "Citation":
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)

    def to_record(self) -> dict[str, Any]:
        """Flatten to the key-value record used by JSON reports."""
        return {
            "raw_text": self.raw_text,
            "bboxes": [b.to_record() for b in self.bboxes],
            "spans": [s.to_record() for s in self.spans],
            "title": self.title,
            "fields": {tag.value: text for tag, text in self.fields.items()},
            "match": self.match.to_record() if self.match else None,
            "status": self.status.value,
        }

    def display(self, verbosity: str = "full") -> str:
        return render_citation(self, verbosity)


def citation_from_record(record: Mapping[str, Any]) -> Citation:
    """Build a :class:`Citation` from a flat key-value record.

    The schema is strict: unknown keys are errors rather than silently
    ignored, and ``raw_text`` must be present and non-empty.  Span offsets
    are re-checked against ``raw_text`` so a tampered record cannot smuggle
    in inconsistent spans.
    """
    unknown = set(record) - _CITATION_KEYS
    if unknown:
        raise UnknownField(f"unknown citation keys: {sorted(unknown)}")
    raw_text = record.get("raw_text")
    if not raw_text or not isinstance(raw_text, str):
        raise MissingField("citation record requires a non-empty raw_text")

    bboxes = [BoundingBox.from_record(b) for b in record.get("bboxes") or []]
    spans = [LabeledSpan.from_record(s) for s in record.get("spans") or []]
    for span in spans:
        if span.end_char > len(raw_text):
            raise MissingField(
                f"span [{span.start_char}, {span.end_char}) exceeds raw_text"
            )
        if raw_text[span.start_char : span.end_char] != span.text:
            raise MissingField(
                f"span text does not re-slice raw_text at "
                f"[{span.start_char}, {span.end_char})"
            )

    fields_rec = record.get("fields") or {}
    fields = {FieldTag(tag): str(text) for tag, text in fields_rec.items()}
    match_rec = record.get("match")
    match = MatchResult.from_record(match_rec) if match_rec else None
    status = CitationStatus(record.get("status", "extracted"))
    return Citation(
        raw_text=raw_text,
        bboxes=bboxes,
        spans=spans,
        title=str(record.get("title", "")),
        fields=fields,
        match=match,
        status=status,
    )


def render_citation(c: Citation, verbosity: str = "full") -> str:
    """Render a citation as deterministic human-readable text.

    ``minimal`` is just the raw string; ``full`` adds the recognized fields,
    match outcome and bounding boxes, one per line.
    """
    if verbosity not in ("minimal", "full"):
        raise ValueError(f"unknown verbosity {verbosity!r}")
    if verbosity == "minimal":
        return c.raw_text

    lines = [c.raw_text]
    if c.title:
        lines.append(f"  title: {c.title}")
    author = c.fields.get(FieldTag.AUTHOR, "")
    if author:
        lines.append(f"  author: {author}")
    for tag in FieldTag:
        if tag in (FieldTag.TITLE, FieldTag.AUTHOR, FieldTag.OTHER):
            continue
        text = c.fields.get(tag, "")
        if text:
            lines.append(f"  {tag.value}: {text}")
    if c.match is not None:
        verdict = "matched" if c.match.matched else "no match"
        detail = f"  match: {verdict} (score {c.match.score:.4f}"
        if c.match.db_name:
            detail += f", db {c.match.db_name}"
        if c.match.matched_id:
            detail += f", id {c.match.matched_id}"
        lines.append(detail + ")")
    for box in c.bboxes:
        lines.append(
            f"  page {box.page_index}: "
            f"({box.x0:.2f}, {box.y0:.2f}, {box.x1:.2f}, {box.y1:.2f})"
        )
    lines.append(f"  status: {c.status.value}")
    return "\n".join(lines)
