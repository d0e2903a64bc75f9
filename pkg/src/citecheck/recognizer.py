"""Citation recognition: sequence labeling of bibliographic fields.

Each token of a citation string gets one of the 18 field tags (or
``other``); the title field is assembled from the tagged runs.  Labelers
are pluggable: the default is a deterministic cue-word/positional rule
labeler that needs no model files, stays CPU-only and produces the same
output on every platform.  Learned labelers implement the same ``label``
contract and advertise their identity (name, version) for the report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

from .errors import LengthMismatch, ModelUnavailable, RecognitionError
from .model import Citation, CitationStatus, FieldTag, LabeledSpan


@dataclass(frozen=True)
class Token:
    text: str
    start_char: int
    end_char: int
    shape: str


# punctuation that opens/closes or terminates fields; always its own token
_SPLIT_PUNCT = set('.,:;"()“”‘’')


def _shape_of(text: str) -> str:
    classes = []
    for ch in text:
        if ch.isupper():
            c = "A"
        elif ch.islower():
            c = "a"
        elif ch.isdigit():
            c = "d"
        else:
            c = "p"
        if not classes or classes[-1] != c:
            classes.append(c)
    return "".join(classes) or "p"


def tokenize(raw_text: str) -> list[Token]:
    """Split on whitespace, peeling field-delimiting punctuation.

    Offsets index into ``raw_text`` so that every token re-slices it
    exactly; interior punctuation (hyphens, slashes, the colon in
    ``arXiv:...``) stays inside its token.
    """
    if not raw_text:
        return []
    tokens: list[Token] = []

    def emit(start: int, end: int) -> None:
        text = raw_text[start:end]
        tokens.append(Token(text, start, end, _shape_of(text)))

    for m in re.finditer(r"\S+", raw_text):
        start, end = m.start(), m.end()
        # peel leading punctuation
        while start < end and raw_text[start] in _SPLIT_PUNCT:
            emit(start, start + 1)
            start += 1
        # find trailing punctuation run
        tail = end
        while tail > start and raw_text[tail - 1] in _SPLIT_PUNCT:
            tail -= 1
        if tail > start:
            emit(start, tail)
        for i in range(tail, end):
            emit(i, i + 1)
    return tokens


@runtime_checkable
class Labeler(Protocol):
    """Plug-in contract: one tag per token, plus a reproducible identity."""

    name: str
    version: str

    def label(self, tokens: list[Token]) -> list[FieldTag]: ...


class FileBackedLabeler:
    """Base class for learned labelers loaded from a weights directory.

    Construction fails with :class:`ModelUnavailable` when the weights are
    missing; there is deliberately no silent fallback to the rule labeler,
    since that would change results without anyone noticing.
    """

    name = "file-backed"
    version = "0"

    def __init__(self, weights_path: str | Path):
        self.weights_path = Path(weights_path)
        if not self.weights_path.exists():
            raise ModelUnavailable(
                f"labeler {self.name!r} is configured but its weights at "
                f"{self.weights_path} do not exist"
            )

    def label(self, tokens: list[Token]) -> list[FieldTag]:
        raise NotImplementedError


# --- the default rule labeler ---------------------------------------------------

_YEAR_RE = re.compile(r"^(1[89]\d\d|20\d\d)[a-z]?$")
_ARXIV_ID_RE = re.compile(r"^arXiv:\d{4}\.\d{4,5}(v\d+)?$", re.IGNORECASE)
_DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")
_PAGE_RANGE_RE = re.compile(r"^\d+[–—‒-]+\d+$")
_NUMBER_RE = re.compile(r"^\d+$")

_ABBREVIATIONS = {
    "pp", "vol", "vols", "no", "nos", "eds", "ed", "proc", "conf", "int",
    "intl", "natl", "dept", "univ", "tech", "rep", "st", "jr", "sr", "vs",
    "cf", "al", "et", "fig", "eq", "sec", "ch", "pt", "pg", "ms", "trans",
    "assoc", "soc", "comput", "artif", "intell", "mach", "learn", "res",
    "sci", "eng", "j", "acm", "ieee", "inc", "ltd", "co", "corp", "inst",
    "lab", "labs", "symp", "adv", "phys", "rev", "lett", "ann", "appl",
}
_BOOKTITLE_CUES = {
    "proceedings", "proc", "conference", "conf", "workshop", "symposium",
    "symp", "meeting", "colloquium", "congress",
}
_JOURNAL_CUES = {
    "journal", "transactions", "trans", "quarterly", "letters", "magazine",
}
_PAGE_CUES = {"pp", "pages", "page"}
_VOLUME_CUES = {"vol", "vols", "volume"}
_ISSUE_CUES = {"no", "nos", "number", "issue"}
_EDITOR_CUES = {"ed", "eds", "editor", "editors"}
_PUBLISHER_WORDS = {
    "press", "publishers", "publishing", "springer", "elsevier", "wiley",
    "routledge", "kluwer", "birkhauser", "pmlr",
}
_TECH_PHRASES = (
    ("technical", "report"), ("tech", "rep"), ("phd", "thesis"),
    ("ph", "d", "thesis"), ("master's", "thesis"), ("masters", "thesis"),
    ("diploma", "thesis"),
)
_INSTITUTION_CUES = {
    "university", "institute", "laboratory", "laboratories", "college",
    "department", "dept", "school",
}
_COUNTRIES = {
    "usa", "u.s.a", "canada", "uk", "england", "germany", "france", "japan",
    "china", "italy", "spain", "australia", "netherlands", "switzerland",
    "sweden", "korea", "india", "singapore", "brazil", "mexico", "portugal",
    "austria", "belgium", "denmark", "finland", "norway", "greece", "ireland",
    "israel", "czechia", "poland", "hungary", "turkey", "thailand", "vietnam",
}
_NOTE_PHRASES = ("in press", "to appear", "forthcoming", "under review")
_SERIES_CUES = {"lncs", "lnai", "series"}


class RuleLabeler:
    """Deterministic cue-word and position based tagger.

    Handles the common scholarly formats: ACL-style author-year entries,
    APA parenthesized years, IEEE quoted titles and MLA quoted titles.
    Nuanced tags (collaboration, pubnum, location, ...) are emitted only on
    unambiguous cues; everything uncertain stays ``other`` so that a wrong
    guess never contaminates the title used for matching.
    """

    name = "cueword-rules"
    version = "1.0"

    def label(self, tokens: list[Token]) -> list[FieldTag]:
        n = len(tokens)
        if n == 0:
            return []
        tags = [FieldTag.OTHER] * n
        texts = [t.text for t in tokens]
        lower = [t.lower() for t in texts]

        self._mark_literals(tokens, texts, lower, tags)
        boundaries = self._segment_boundaries(tokens, texts, lower)
        segments = self._segments(boundaries, n)

        quoted = self._quoted_region(texts)
        date_idx = next((i for i, t in enumerate(tags) if t is FieldTag.DATE), None)

        self._tag_authors(tokens, texts, lower, tags, segments, date_idx, quoted)
        self._tag_title(tokens, texts, lower, tags, segments, date_idx, quoted)
        self._tag_details(tokens, texts, lower, tags)
        self._tag_venues(texts, lower, tags, segments)
        self._trim_run_punctuation(tokens, tags)
        return tags

    # -- structural passes -----------------------------------------------------

    def _mark_literals(self, tokens, texts, lower, tags) -> None:
        for i, text in enumerate(texts):
            if _YEAR_RE.match(text):
                tags[i] = FieldTag.DATE
            elif "://" in text or text.lower().startswith(("www.", "doi:")) \
                    or _DOI_RE.match(text):
                tags[i] = FieldTag.WEB
            elif _ARXIV_ID_RE.match(text):
                tags[i] = FieldTag.PUBNUM
            elif lower[i] == "collaboration" and i > 0 and texts[i - 1][:1].isupper():
                tags[i] = FieldTag.COLLABORATION
                tags[i - 1] = FieldTag.COLLABORATION

    def _segment_boundaries(self, tokens, texts, lower) -> list[int]:
        """Indices of '.' tokens that end a field segment."""
        first_date = next(
            (i for i, t in enumerate(texts) if _YEAR_RE.match(t)), len(texts)
        )
        out = []
        for i, text in enumerate(texts):
            if text != ".":
                continue
            prev = texts[i - 1] if i > 0 else ""
            prev_low = lower[i - 1] if i > 0 else ""
            nxt = texts[i + 1] if i + 1 < len(texts) else ""
            if len(prev) == 1 and prev.isupper() and i <= first_date:
                continue  # author initial; after the year a bare capital
                # is more likely the end of a title ("... Part Q.")
            if prev_low in _ABBREVIATIONS:
                continue
            if nxt[:1].islower() and not (prev.isalpha() and prev.islower() and len(prev) >= 3):
                # mid-phrase abbreviation like "Proc. of"; a full lowercase
                # word before the period means a real sentence break
                continue
            out.append(i)
        return out

    @staticmethod
    def _segments(boundaries: list[int], n: int) -> list[tuple[int, int]]:
        segments = []
        start = 0
        for b in boundaries:
            if b > start:
                segments.append((start, b))
            start = b + 1
        if start < n:
            segments.append((start, n))
        return segments

    @staticmethod
    def _quoted_region(texts) -> tuple[int, int] | None:
        opens = {'"', "“"}
        closes = {'"', "”"}
        open_idx = None
        for i, t in enumerate(texts):
            if open_idx is None and t in opens:
                open_idx = i
            elif open_idx is not None and t in closes:
                if i - open_idx > 1:
                    return (open_idx + 1, i)
                open_idx = None
        return None

    # -- field passes --------------------------------------------------------------

    def _tag_authors(self, tokens, texts, lower, tags, segments, date_idx, quoted) -> None:
        if not segments:
            return
        first_seg_end = segments[0][1]
        if date_idx is not None and date_idx <= (segments[1][1] if len(segments) > 1 else first_seg_end):
            end = date_idx
        else:
            end = first_seg_end
        if quoted is not None:
            end = min(end, quoted[0])
        has_name = any(
            texts[i][:1].isupper() and texts[i].isalpha()
            for i in range(min(end, len(texts)))
        )
        if not has_name:
            return
        for i in range(end):
            if tags[i] is not FieldTag.OTHER:
                continue
            t = texts[i]
            if t in "()":
                continue
            if t.isalpha() or t in ",.&-" or lower[i] in ("and", "et", "al") \
                    or (t[:1].isalpha() and all(c.isalpha() or c in "'-." for c in t)):
                tags[i] = FieldTag.AUTHOR

    def _tag_title(self, tokens, texts, lower, tags, segments, date_idx, quoted) -> None:
        if quoted is not None:
            lo, hi = quoted
            if any(any(c.isalpha() for c in texts[i]) for i in range(lo, hi)):
                for i in range(lo, hi):
                    if tags[i] in (FieldTag.OTHER, FieldTag.AUTHOR):
                        tags[i] = FieldTag.TITLE
                return
        # positional: the segment after the one holding the first date,
        # else the second segment (numeric/no-date styles)
        start = None
        if date_idx is not None:
            j = date_idx + 1
            while j < len(texts) and (texts[j] in ").,;:" or _YEAR_RE.match(texts[j])):
                j += 1
            if j < len(texts):
                start = j
        if start is None and len(segments) >= 2:
            start = segments[1][0]
        if start is None:
            return
        seg_end = next((e for s, e in segments if s <= start < e), None)
        if seg_end is None:
            return
        run = []
        for i in range(start, seg_end):
            if tags[i] in (FieldTag.DATE, FieldTag.WEB, FieldTag.PUBNUM):
                break
            run.append(i)
        if not run:
            return
        words = [lower[i] for i in run]
        if words and words[0] == "in":
            return  # venue segment, not a title
        if any(w in _BOOKTITLE_CUES or w in _JOURNAL_CUES for w in words):
            return
        if not any(any(c.isalpha() for c in texts[i]) for i in run):
            return
        for i in run:
            if tags[i] is FieldTag.OTHER or tags[i] is FieldTag.AUTHOR:
                tags[i] = FieldTag.TITLE

    def _tag_venues(self, texts, lower, tags, segments) -> None:
        for s, e in segments:
            if any(tags[i] is FieldTag.TITLE for i in range(s, e)):
                continue
            words = set(lower[s:e])
            tag = None
            if words & _BOOKTITLE_CUES:
                tag = FieldTag.BOOKTITLE
            elif words & _JOURNAL_CUES:
                tag = FieldTag.JOURNAL
            elif "arxiv" in words and "preprint" in words:
                tag = FieldTag.JOURNAL
            if tag is None:
                continue
            for i in range(s, e):
                if tags[i] is not FieldTag.OTHER:
                    continue
                if lower[i] == "in" and i == s:
                    continue
                if _NUMBER_RE.match(texts[i]):
                    continue  # stray numerals are not part of a venue name
                tags[i] = tag

    def _tag_details(self, tokens, texts, lower, tags) -> None:
        n = len(texts)

        def next_real(i):
            j = i + 1
            while j < n and not (texts[j].isalnum() or _PAGE_RANGE_RE.match(texts[j])):
                j += 1
            return j if j < n else None

        for i in range(n):
            if tags[i] is FieldTag.TITLE:
                continue  # cue words inside a recognized title stay title
            low = lower[i]
            if low in _PAGE_CUES and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.PAGES
                j = i + 1
                while j < n and tags[j] is FieldTag.OTHER and (
                    texts[j] == "." or _PAGE_RANGE_RE.match(texts[j])
                    or _NUMBER_RE.match(texts[j]) or texts[j] == ","
                ):
                    if texts[j] not in ".,":
                        tags[j] = FieldTag.PAGES
                    elif texts[j] == "." and j == i + 1:
                        tags[j] = FieldTag.PAGES  # the period of "pp."
                    j += 1
            elif low in _VOLUME_CUES and tags[i] is FieldTag.OTHER:
                j = next_real(i)
                if j is not None and _NUMBER_RE.match(texts[j]) \
                        and tags[j] is FieldTag.OTHER:
                    tags[i] = FieldTag.VOLUME
                    tags[j] = FieldTag.VOLUME
            elif low in _ISSUE_CUES and texts[i] != "No" and tags[i] is FieldTag.OTHER:
                j = next_real(i)
                if j is not None and _NUMBER_RE.match(texts[j]) and i + 2 >= j \
                        and tags[j] is FieldTag.OTHER:
                    tags[i] = FieldTag.ISSUE
                    tags[j] = FieldTag.ISSUE
            elif low in _EDITOR_CUES and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.EDITOR
                j = i - 1
                while j >= 0 and (texts[j] in ",." or texts[j].isalpha()) \
                        and lower[j] != "in" and tags[j] in (FieldTag.OTHER, FieldTag.AUTHOR):
                    if texts[j] not in ",.":
                        tags[j] = FieldTag.EDITOR
                    j -= 1
            elif low in _PUBLISHER_WORDS and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.PUBLISHER
                if low in ("press", "publishers", "publishing"):
                    j = i - 1
                    while j >= 0 and texts[j][:1].isupper() and tags[j] is FieldTag.OTHER:
                        tags[j] = FieldTag.PUBLISHER
                        j -= 1
            elif low in _SERIES_CUES and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.SERIES
            elif _PAGE_RANGE_RE.match(texts[i]) and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.PAGES
            elif re.match(r"^\d+\(\d+\)?$", texts[i]) and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.VOLUME  # composite volume(issue) token
            elif low in _COUNTRIES and tags[i] is FieldTag.OTHER:
                tags[i] = FieldTag.LOCATION
                if i >= 2 and texts[i - 1] == "," and texts[i - 2][:1].isupper() \
                        and tags[i - 2] is FieldTag.OTHER:
                    tags[i - 2] = FieldTag.LOCATION

        # volume(issue):pages pattern, e.g. 12 ( 3 ) : 45-67
        for i in range(n - 3):
            if (_NUMBER_RE.match(texts[i]) and tags[i] is FieldTag.OTHER
                    and texts[i + 1] == "(" and _NUMBER_RE.match(texts[i + 2])
                    and i + 3 < n and texts[i + 3] == ")"):
                tags[i] = FieldTag.VOLUME
                tags[i + 2] = FieldTag.ISSUE

        # multi-token phrases
        for phrase in _TECH_PHRASES:
            for i in range(n - len(phrase) + 1):
                window = [lower[i + k].rstrip(".") for k in range(len(phrase))]
                if tuple(window) == phrase:
                    for k in range(len(phrase)):
                        tags[i + k] = FieldTag.TECH
        for phrase in _NOTE_PHRASES:
            parts = phrase.split()
            for i in range(n - len(parts) + 1):
                if [lower[i + k] for k in range(len(parts))] == parts:
                    for k in range(len(parts)):
                        tags[i + k] = FieldTag.NOTE
        has_tech = any(t is FieldTag.TECH for t in tags)
        for i in range(n):
            if lower[i] in _INSTITUTION_CUES and tags[i] is FieldTag.OTHER and has_tech:
                tags[i] = FieldTag.INSTITUTION
                j = i - 1  # pull in the rest of the comma group: "CERN University"
                while j >= 0 and texts[j][:1].isupper() and tags[j] is FieldTag.OTHER:
                    tags[j] = FieldTag.INSTITUTION
                    j -= 1
        if has_tech:
            # report identifiers right after the tech phrase, e.g. CERN-2019-001
            for i in range(1, n):
                if tags[i - 1] is FieldTag.TECH and tags[i] is FieldTag.OTHER \
                        and re.match(r"^[A-Z]{2,}[-/][A-Z0-9/-]*\d", texts[i]):
                    tags[i] = FieldTag.PUBNUM

    @staticmethod
    def _trim_run_punctuation(tokens, tags) -> None:
        """Demote punctuation at the ends of tagged runs back to `other`."""
        n = len(tags)
        i = 0
        while i < n:
            tag = tags[i]
            if tag is FieldTag.OTHER:
                i += 1
                continue
            j = i
            while j + 1 < n and tags[j + 1] is tag:
                j += 1
            while i <= j and not tokens[i].text[:1].isalnum():
                tags[i] = FieldTag.OTHER
                i += 1
            k = j
            while k >= i and not tokens[k].text[:1].isalnum():
                tags[k] = FieldTag.OTHER
                k -= 1
            i = j + 1


_DEFAULT_LABELER = RuleLabeler()

_REGISTRY: dict[str, object] = {"cueword-rules": _DEFAULT_LABELER,
                                "heuristic": _DEFAULT_LABELER}


def register_labeler(name: str, labeler) -> None:
    _REGISTRY[name] = labeler


def get_labeler(name: str | None = None):
    if name is None:
        return _DEFAULT_LABELER
    candidate = _REGISTRY.get(name)
    if candidate is None:
        raise LookupError(
            f"unknown labeler {name!r}; registered: {sorted(_REGISTRY)}"
        )
    return candidate


def label_tokens(tokens: list[Token], labeler: Labeler | None = None) -> list[FieldTag]:
    """One tag per token; validates the labeler kept the contract."""
    if not tokens:
        return []
    labeler = labeler or _DEFAULT_LABELER
    tags = labeler.label(list(tokens))
    if len(tags) != len(tokens):
        raise LengthMismatch(
            f"labeler {labeler.name!r} returned {len(tags)} tags for "
            f"{len(tokens)} tokens"
        )
    bad = next((t for t in tags if not isinstance(t, FieldTag)), None)
    if bad is not None:
        raise LengthMismatch(f"labeler emitted a non-FieldTag value: {bad!r}")
    return tags


def assemble_fields(citation: Citation, tags: list[FieldTag]) -> Citation:
    """Turn a tag sequence into spans, fields and the title.

    Contiguous same-tag runs become spans.  The title is the longest title
    run by token count (earliest run wins ties); a citation with no title
    run is terminal ``unverifiable`` so that recognition failures are
    reported rather than silently treated as clean.
    """
    tokens = tokenize(citation.raw_text)
    if len(tags) != len(tokens):
        raise LengthMismatch(
            f"{len(tags)} tags for {len(tokens)} tokens of {citation.raw_text!r}"
        )
    spans: list[LabeledSpan] = []
    run_tokens: list[int] = []
    i = 0
    n = len(tokens)
    while i < n:
        tag = tags[i]
        if tag is FieldTag.OTHER:
            i += 1
            continue
        j = i
        while j + 1 < n and tags[j + 1] is tag:
            j += 1
        start = tokens[i].start_char
        end = tokens[j].end_char
        spans.append(LabeledSpan(tag, start, end, citation.raw_text[start:end]))
        run_tokens.append(j - i + 1)
        i = j + 1

    fields: dict[FieldTag, str] = {}
    for span in spans:
        if span.tag in fields:
            fields[span.tag] = fields[span.tag] + " " + span.text
        else:
            fields[span.tag] = span.text

    title = ""
    best_len = 0
    for span, count in zip(spans, run_tokens):
        if span.tag is FieldTag.TITLE and count > best_len:
            best_len = count
            title = span.text

    status = CitationStatus.RECOGNIZED if title else CitationStatus.UNVERIFIABLE
    return citation.replace(spans=spans, fields=fields, title=title, status=status)


def parse(citation: Citation, labeler: Labeler | None = None) -> Citation:
    """Recognize one extracted citation."""
    if citation.status is not CitationStatus.EXTRACTED:
        raise ValueError(
            f"parse expects an extracted citation, got {citation.status.value!r}"
        )
    tokens = tokenize(citation.raw_text)
    tags = label_tokens(tokens, labeler)
    return assemble_fields(citation, tags)


def parse_batch(citations: list[Citation], labeler: Labeler | None = None) -> list[Citation]:
    """Recognize a batch, order-preserving; equivalent to mapping parse()."""
    out: list[Citation] = []
    for index, citation in enumerate(citations):
        try:
            out.append(parse(citation, labeler))
        except (ValueError, LengthMismatch):
            raise
        except Exception as e:
            raise RecognitionError(
                f"labeler failed on citation {index}: {e}", citation_index=index
            ) from e
    return out
