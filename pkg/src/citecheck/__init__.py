"""citecheck: offline detection of hallucinated citations in scientific PDFs.

The pipeline has three stages, each usable on its own:

    from citecheck import extractor, recognizer, matcher, bibdb

    lines = extractor.extract_document("paper.pdf")
    region = extractor.locate_reference_section(lines)
    refs = extractor.segment_entries(region)          # list[Citation]
    citations = recognizer.parse_batch(refs)          # adds fields + title
    db = bibdb.load("dbs/acl")
    flagged = matcher.verify(citations_with_titles, db)

Databases chain: ``matcher.verify(matcher.verify(cs, db1), db2)`` flags only
citations that neither database confirms.  The ``citecheck`` CLI and the
FastAPI service in :mod:`citecheck.service` wrap the same pipeline.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BoundingBox,
    Citation,
    CitationStatus,
    FieldTag,
    LabeledSpan,
    MatchResult,
    StageTiming,
    citation_from_record,
    render_citation,
)

__all__ = [
    "BoundingBox",
    "Citation",
    "CitationStatus",
    "FieldTag",
    "LabeledSpan",
    "MatchResult",
    "StageTiming",
    "__version__",
    "citation_from_record",
    "render_citation",
]
