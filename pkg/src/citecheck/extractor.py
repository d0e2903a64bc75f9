"""Citation extraction: PDF text -> reference section -> one string per entry.

The PDF backend is an abstraction boundary: everything downstream consumes
positioned :class:`TextLine` values, so any parser that can produce them
can replace the built-in one.  Section location and entry segmentation are
heuristic by nature; the heuristics are documented inline and chosen to
fail toward "report for a human" rather than silently dropping text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Protocol

from .errors import EmptyDocument, NoReferenceSection, UnreadableDocument
from .model import BoundingBox, Citation
from .pdf import PdfDocument, extract_page_runs, open_pdf


@dataclass(frozen=True)
class TextLine:
    """One visual line of text anchored to a page."""

    page_index: int
    bbox: BoundingBox
    text: str
    column_index: int = 0


@dataclass(frozen=True)
class PageSize:
    width: float
    height: float


@dataclass
class DocumentText:
    """Backend output: page geometry plus text lines in reading order."""

    pages: list[PageSize]
    lines: list[TextLine]


@dataclass
class ReferenceRegion:
    """The lines of the reference section, heading excluded."""

    lines: list[TextLine]
    heading_line: TextLine


class TextBackend(Protocol):
    def read(self, path) -> DocumentText: ...


# --- built-in backend ---------------------------------------------------------

_LINE_Y_TOL = 2.0          # pt: runs within this of a baseline share a line
_COLUMN_GAP_FACTOR = 2.2   # em widths: larger in-line gaps split columns
_WORD_GAP_FACTOR = 0.22    # em widths: smaller gaps join without a space


class BuiltinPdfBackend:
    """Positioned-text extraction using the bundled PDF parser."""

    def read(self, path) -> DocumentText:
        doc = open_pdf(path)
        return self.from_document(doc)

    def from_document(self, doc: PdfDocument) -> DocumentText:
        pages = []
        for page in doc.pages():
            x0, y0, x1, y1 = doc.media_box(page)
            pages.append(PageSize(width=x1 - x0, height=y1 - y0))
        all_lines: list[TextLine] = []
        page_runs = extract_page_runs(doc)
        for page_index, runs in enumerate(page_runs):
            size = pages[page_index]
            all_lines.extend(self._assemble_lines(page_index, runs, size))
        if not any(line.text for line in all_lines):
            raise EmptyDocument(
                "no extractable text layer; the document appears to be scanned "
                "images (OCR is out of scope)"
            )
        return DocumentText(pages=pages, lines=all_lines)

    def _assemble_lines(self, page_index, runs, size: PageSize) -> list[TextLine]:
        if not runs:
            return []
        # cluster runs by baseline
        runs = sorted(runs, key=lambda r: (-r.baseline, r.x0))
        rows: list[list] = []
        for run in runs:
            if rows and abs(rows[-1][0].baseline - run.baseline) <= _LINE_Y_TOL:
                rows[-1].append(run)
            else:
                rows.append([run])
        fragments: list[TextLine] = []
        for row in rows:
            row.sort(key=lambda r: r.x0)
            groups: list[list] = [[row[0]]]
            for run in row[1:]:
                prev = groups[-1][-1]
                em = max(prev.size, run.size, 1.0)
                if run.x0 - prev.x1 > _COLUMN_GAP_FACTOR * em:
                    groups.append([run])
                else:
                    groups[-1].append(run)
            for group in groups:
                line = self._merge_group(page_index, group, size)
                if line is not None:
                    fragments.append(line)
        return fragments

    def _merge_group(self, page_index, group, size: PageSize) -> TextLine | None:
        parts = []
        for i, run in enumerate(group):
            if i > 0:
                prev = group[i - 1]
                em = max(prev.size, run.size, 1.0)
                gap = run.x0 - prev.x1
                if gap > _WORD_GAP_FACTOR * em and not parts[-1].endswith(" "):
                    parts.append(" ")
            parts.append(run.text)
        text = re.sub(r"\s+", " ", "".join(parts)).strip()
        if not text:
            return None
        x0 = min(r.x0 for r in group)
        x1 = max(r.x1 for r in group)
        top = max(r.baseline + r.ascent * r.size for r in group)
        bottom = min(r.baseline - r.descent * r.size for r in group)
        # clamp to the media box; glyph metrics can overshoot by a hair
        x0 = max(0.0, min(x0, size.width))
        x1 = max(x0, min(x1, size.width))
        bottom = max(0.0, min(bottom, size.height))
        top = max(bottom, min(top, size.height))
        box = BoundingBox(page_index, x0, bottom, x1, top)
        return TextLine(page_index=page_index, bbox=box, text=text)


_DEFAULT_BACKEND = BuiltinPdfBackend()

_HEADER_BAND = 36.0  # pt from page top/bottom


def _strip_headers_footers(doc_text: DocumentText) -> list[TextLine]:
    """Drop running headers/footers and page numbers.

    A line goes when it sits in the top/bottom 36 pt band and either
    repeats verbatim on three or more pages or is a bare page number.
    """
    page_count = len(doc_text.pages)
    band_text_pages: dict[str, set[int]] = {}
    in_band: list[bool] = []
    for line in doc_text.lines:
        height = doc_text.pages[line.page_index].height
        banded = line.bbox.y0 >= height - _HEADER_BAND or line.bbox.y1 <= _HEADER_BAND
        in_band.append(banded)
        if banded:
            band_text_pages.setdefault(line.text, set()).add(line.page_index)
    repeated = {t for t, pages in band_text_pages.items() if len(pages) >= 3}
    out = []
    for line, banded in zip(doc_text.lines, in_band):
        if banded and (line.text in repeated or re.fullmatch(r"\d{1,4}", line.text)):
            continue
        out.append(line)
    return out if page_count else out


def _order_columns(lines: list[TextLine], pages: list[PageSize]) -> list[TextLine]:
    """Reading order: per page, left/full-width column first, then right."""
    ordered: list[TextLine] = []
    by_page: dict[int, list[TextLine]] = {}
    for line in lines:
        by_page.setdefault(line.page_index, []).append(line)
    for page_index in sorted(by_page):
        page_lines = by_page[page_index]
        mid = pages[page_index].width / 2.0
        right = [ln for ln in page_lines if ln.bbox.x0 >= mid - 10.0]
        # a real second column shows a tight cluster of right-half line starts
        two_column = len(right) >= 2 and (
            max(ln.bbox.x0 for ln in right) - min(ln.bbox.x0 for ln in right) <= 60.0
        )
        if not two_column:
            ordered.extend(sorted(page_lines, key=lambda ln: (-ln.bbox.y1, ln.bbox.x0)))
            continue
        left = [ln for ln in page_lines if ln.bbox.x0 < mid - 10.0]
        for column_index, column in enumerate((left, right)):
            column.sort(key=lambda ln: (-ln.bbox.y1, ln.bbox.x0))
            ordered.extend(
                TextLine(ln.page_index, ln.bbox, ln.text, column_index)
                for ln in column
            )
    return ordered


def extract_document(path, backend: TextBackend | None = None) -> list[TextLine]:
    """All text lines of a PDF in reading order, with page-anchored boxes.

    Two-column pages are linearized left column before right column.
    Running headers/footers and page numbers are removed so entries that
    straddle pages can be joined cleanly.
    """
    backend = backend or _DEFAULT_BACKEND
    doc_text = backend.read(path)
    lines = _strip_headers_footers(doc_text)
    lines = _order_columns(lines, doc_text.pages)
    if not lines:
        raise EmptyDocument("document has no text lines after cleanup")
    return lines


# --- reference section location ------------------------------------------------

_HEADING_RE = re.compile(
    r"^(?:(?:\d{1,2}|[ivxlc]+)[.)]?\s+)?(references|bibliography|reference)\s*[.:]?$",
    re.IGNORECASE,
)
_TERMINATOR_RES = (
    re.compile(r"^(appendix|appendices)\b", re.IGNORECASE),
    re.compile(r"^supplementary\s+\w+", re.IGNORECASE),
    re.compile(r"^acknowledg(e)?ments?\s*$", re.IGNORECASE),
)
# "A  Proofs" / "B. Details" style appendix headings: short, no commas/digits
_APPENDIX_LETTER_RE = re.compile(r"^[A-Z][.)]?\s+[A-Z][A-Za-z]*(\s+[A-Za-z\-]+){0,7}$")


def _is_terminator(text: str) -> bool:
    if len(text) > 60:
        return False
    for rx in _TERMINATOR_RES:
        if rx.match(text):
            return True
    if "," in text or any(ch.isdigit() for ch in text):
        return False
    return bool(_APPENDIX_LETTER_RE.match(text)) and not text.rstrip().endswith(".")


def locate_reference_section(lines: list[TextLine]) -> ReferenceRegion:
    """Find the span of lines making up the reference list.

    The last line matching a References/Bibliography heading wins (the true
    section conventionally sits after any table-of-contents mention); the
    region runs until an appendix/supplementary heading or document end.
    """
    if not lines:
        raise NoReferenceSection("document has no text lines")
    heading_idx = -1
    for i, line in enumerate(lines):
        if _HEADING_RE.match(line.text.strip()):
            heading_idx = i
    if heading_idx < 0:
        raise NoReferenceSection(
            "no References/Bibliography heading found; the document cannot be "
            "verified automatically"
        )
    end = len(lines)
    for j in range(heading_idx + 1, len(lines)):
        if _is_terminator(lines[j].text.strip()):
            end = j
            break
    return ReferenceRegion(
        lines=list(lines[heading_idx + 1 : end]),
        heading_line=lines[heading_idx],
    )


# --- entry segmentation ----------------------------------------------------------

_BRACKET_RE = re.compile(r"^\[(\d{1,4})\]\s*")
_NUMBERED_RE = re.compile(r"^(\d{1,3})\.\s+")
_AUTHOR_START_RE = re.compile(
    r"^(?:[A-Z][A-Za-z'’\-]+,\s*(?:[A-Z]\.|[A-Z][A-Za-z'’\-]+)"
    r"|[A-Z]\.\s*[A-Z][A-Za-z'’\-]+"
    r"|[A-Z][A-Za-z'’\-]+\s+[A-Z][A-Za-z'’\-]*\.?,?\s+(?:and\s+)?[A-Z])"
)
_HANG_INDENT_PT = 8.0


def _detect_bracket_starts(lines: list[TextLine]) -> list[int] | None:
    starts = [i for i, ln in enumerate(lines) if _BRACKET_RE.match(ln.text)]
    if not starts or starts[0] != 0:
        return None
    if len(starts) < 2 and len(lines) > 3:
        return None
    return starts


def _detect_numbered_starts(lines: list[TextLine]) -> list[int] | None:
    candidates = []
    for i, ln in enumerate(lines):
        m = _NUMBERED_RE.match(ln.text)
        if m:
            candidates.append((i, int(m.group(1))))
    if not candidates or candidates[0][0] != 0:
        return None
    starts = [candidates[0][0]]
    expected = candidates[0][1] + 1
    for i, num in candidates[1:]:
        if num == expected:
            starts.append(i)
            expected += 1
    if len(starts) < 2 and len(lines) > 3:
        return None
    return starts


def _column_margins(lines: list[TextLine]) -> dict[tuple[int, int], float]:
    """Left margin per (page, column), from the x0 histogram."""
    groups: dict[tuple[int, int], list[float]] = {}
    for ln in lines:
        groups.setdefault((ln.page_index, ln.column_index), []).append(ln.bbox.x0)
    margins = {}
    for key, xs in groups.items():
        counts: dict[float, int] = {}
        for x in xs:
            counts[round(x)] = counts.get(round(x), 0) + 1
        # margin = smallest x0 that is an actual cluster, not a stray outdent
        ordered = sorted(counts)
        margin = ordered[0]
        if counts[margin] == 1 and len(ordered) > 1 and ordered[1] - margin < 4.0:
            margin = ordered[1]
        margins[key] = float(margin)
    return margins


def _detect_indent_starts(lines: list[TextLine]) -> list[int] | None:
    margins = _column_margins(lines)
    starts = []
    saw_continuation = False
    for i, ln in enumerate(lines):
        margin = margins[(ln.page_index, ln.column_index)]
        if ln.bbox.x0 - margin >= _HANG_INDENT_PT:
            saw_continuation = True
        else:
            starts.append(i)
    if not saw_continuation or not starts or starts[0] != 0:
        return None
    return starts


def _detect_author_year_starts(lines: list[TextLine]) -> list[int]:
    starts = [0]
    for i in range(1, len(lines)):
        prev = lines[i - 1].text.rstrip()
        if prev.endswith((".", ")")) and _AUTHOR_START_RE.match(lines[i].text):
            starts.append(i)
    return starts


def _join_lines(texts: list[str]) -> str:
    """Merge wrapped lines, repairing end-of-line hyphenation.

    A trailing hyphen between two lowercase letters is a wrap artifact and
    is removed; any other trailing hyphen is kept and joined without a
    space (protecting hyphenated names like Bi-LSTM).
    """
    out = texts[0].strip()
    for text in texts[1:]:
        nxt = text.strip()
        if not nxt:
            continue
        if out.endswith("-") and len(out) >= 2 and not out.endswith(" -"):
            before = out[-2]
            if before.islower() and nxt[0].islower():
                out = out[:-1] + nxt
            else:
                out = out + nxt
        else:
            out = out + " " + nxt
    return re.sub(r"\s+", " ", out).strip()


def segment_entries(region: ReferenceRegion) -> list[Citation]:
    """Split the reference region into one Citation per entry.

    Boundary cues, in priority order: bracketed markers, consecutive
    numbered markers, hanging indentation, author-name start patterns.
    Markers are stripped from the citation text; every region line lands in
    exactly one entry, and each entry carries one bounding box per
    constituent line (so entries crossing pages keep boxes on both pages).
    """
    lines = region.lines
    if not lines:
        return []

    strip_marker = None
    starts = _detect_bracket_starts(lines)
    if starts is not None:
        strip_marker = _BRACKET_RE
    else:
        starts = _detect_numbered_starts(lines)
        if starts is not None:
            strip_marker = _NUMBERED_RE
        else:
            starts = _detect_indent_starts(lines)
            if starts is None:
                starts = _detect_author_year_starts(lines)

    start_set = set(starts)
    citations: list[Citation] = []
    current_texts: list[str] = []
    current_boxes: list[BoundingBox] = []

    def flush():
        if not current_texts:
            return
        raw = _join_lines(current_texts)
        if raw:
            citations.append(Citation(raw_text=raw, bboxes=list(current_boxes)))

    for i, ln in enumerate(lines):
        if i in start_set and current_texts:
            flush()
            current_texts, current_boxes = [], []
        text = ln.text
        if strip_marker is not None and i in start_set:
            text = strip_marker.sub("", text, count=1)
        current_texts.append(text)
        current_boxes.append(ln.bbox)
    flush()
    return citations
