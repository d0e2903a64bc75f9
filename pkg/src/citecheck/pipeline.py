"""End-to-end document verification: extract, recognize, match, report."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .bibdb import BibDatabase, PinReport
from .errors import AnnotationFailure
from .extractor import extract_document, locate_reference_section, segment_entries
from .matcher import MatcherConfig, find_best_match
from .model import Citation, CitationStatus, Stage
from .pdf import HighlightBox, add_highlights
from .recognizer import Labeler, get_labeler, parse_batch
from .report import Stopwatch, VerificationReport, build_report

logger = logging.getLogger(__name__)

FLAGGED_COLOR = (1.0, 0.85, 0.0)       # amber: candidate hallucinated citations
UNVERIFIABLE_COLOR = (0.55, 0.75, 1.0)  # blue: no title recognized, check by hand


@dataclass
class PipelineResult:
    report: VerificationReport
    flagged: list[Citation]
    unverifiable: list[Citation]
    highlighted_pdf: bytes | None


def verify_document(
    pdf: bytes | str,
    databases: list[BibDatabase],
    *,
    config: MatcherConfig | None = None,
    labeler: Labeler | None = None,
    pin_report: PinReport | None = None,
    highlight: bool = True,
    display_name: str | None = None,
) -> PipelineResult:
    """Run one PDF through the full pipeline.

    Databases are consulted in the given order; a citation is verified by
    the first database that matches it, and flagged only when none does
    (the flagged citation carries the best score seen across all of them).
    Document-level failures (unreadable file, no reference section, no text
    layer) propagate as their error types for the caller to report.
    """
    config = config or MatcherConfig()
    labeler = labeler or get_labeler()
    if isinstance(pdf, (bytes, bytearray)):
        source_bytes = bytes(pdf)
        name = display_name or "<bytes>"
    else:
        name = display_name or str(pdf)
        from .errors import UnreadableDocument

        try:
            with open(pdf, "rb") as f:
                source_bytes = f.read()
        except OSError as e:
            raise UnreadableDocument(f"cannot read {pdf}: {e}") from e

    warnings: list[str] = []
    watch = Stopwatch()
    with watch.stage(Stage.TOTAL):
        with watch.stage(Stage.EXTRACTOR):
            lines = extract_document(source_bytes)
            region = locate_reference_section(lines)
            extracted = segment_entries(region)
        watch.set_units(Stage.EXTRACTOR, len(extracted))

        with watch.stage(Stage.RECOGNIZER):
            parsed = parse_batch(extracted, labeler)
        watch.set_units(Stage.RECOGNIZER, len(parsed))

        recognized = [c for c in parsed if c.status is CitationStatus.RECOGNIZED]
        unverifiable = [c for c in parsed if c.status is CitationStatus.UNVERIFIABLE]

        flagged: list[Citation] = []
        with watch.stage(Stage.MATCHER):
            for citation in recognized:
                best = None
                matched = False
                for db in databases:
                    result = find_best_match(citation.title, db, config)
                    if best is None or result.score > best.score:
                        best = result
                    if result.matched:
                        matched = True
                        break
                if not matched:
                    flagged.append(citation.replace(match=best))
        watch.set_units(Stage.MATCHER, len(recognized))
    watch.set_units(Stage.TOTAL, len(parsed))

    highlighted = None
    if highlight and (flagged or unverifiable):
        boxes = [
            HighlightBox(b.page_index, b.x0, b.y0, b.x1, b.y1,
                         color=FLAGGED_COLOR, opacity=0.35,
                         note=_flag_note(c))
            for c in flagged for b in c.bboxes
        ] + [
            HighlightBox(b.page_index, b.x0, b.y0, b.x1, b.y1,
                         color=UNVERIFIABLE_COLOR, opacity=0.3,
                         note="no title recognized; verify manually")
            for c in unverifiable for b in c.bboxes
        ]
        try:
            highlighted = add_highlights(source_bytes, boxes)
        except AnnotationFailure as e:
            warnings.append(f"highlighting failed: {e}")
            logger.warning("highlighting failed for %s: %s", name, e)

    report = build_report(
        name,
        threshold=config.threshold,
        labeler_name=labeler.name,
        labeler_version=labeler.version,
        manifests=[db.manifest for db in databases],
        pin_report=pin_report,
        extracted=parsed,
        flagged=flagged,
        unverifiable=unverifiable,
        watch=watch,
        warnings=warnings,
    )
    return PipelineResult(
        report=report,
        flagged=flagged,
        unverifiable=unverifiable,
        highlighted_pdf=highlighted,
    )


def _flag_note(citation: Citation) -> str:
    if citation.match is None:
        return "no database match"
    return (
        f"no database match; best similarity {citation.match.score:.3f} "
        f"(threshold not met)"
    )
