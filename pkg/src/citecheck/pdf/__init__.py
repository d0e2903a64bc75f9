"""Built-in PDF backend: text extraction and highlight annotation.

This package reads conforming PDF 1.x/2.0 files with an extractable text
layer and writes highlighted copies via incremental updates.  It has no
dependencies beyond the standard library (plus reportlab's metrics tables
for unembedded standard fonts) and never touches the network.
"""

from .annotate import HighlightBox, add_highlights
from .content import TextRun, extract_page_runs
from .document import PdfDocument, open_pdf

__all__ = [
    "HighlightBox",
    "PdfDocument",
    "TextRun",
    "add_highlights",
    "extract_page_runs",
    "open_pdf",
]
