"""Tests for PDF text extraction, section location and entry segmentation."""

import pytest

from citecheck.errors import EmptyDocument, NoReferenceSection, UnreadableDocument
from citecheck.extractor import (
    ReferenceRegion,
    TextLine,
    extract_document,
    locate_reference_section,
    segment_entries,
)
from citecheck.model import BoundingBox

from pdfgen import (
    PaperLayout,
    acl_style_reference,
    encrypted_pdf,
    image_only_pdf,
    render_paper,
)


def make_line(text, page=0, x0=54.0, y=700.0, column=0, width=240.0):
    box = BoundingBox(page, x0, y, x0 + width, y + 10.0)
    return TextLine(page_index=page, bbox=box, text=text, column_index=column)


REFS = [
    acl_style_reference("John Doe and Jane Smith", 2019,
                        "A Longer Title That Will Definitely Wrap Across Lines",
                        "Proceedings of the Conference on Synthetic Examples", "11-22"),
    acl_style_reference("Wei Li, Maria Garcia and Tom Brown", 2020,
                        "Short Title Here", "Journal of Tests"),
    acl_style_reference("Ann Lee", 2021,
                        "Another Paper About Something Quite Specific",
                        "Proceedings of the Workshop on Fixtures", "1-9"),
]


class TestExtractDocument:
    def test_single_column_lines_in_y_order(self):
        paper = render_paper(REFS, PaperLayout(columns=1, body_lines=5))
        lines = extract_document(paper.pdf_bytes)
        page0 = [ln for ln in lines if ln.page_index == 0]
        ys = [ln.bbox.y1 for ln in page0]
        assert ys == sorted(ys, reverse=True)
        assert any("1 Introduction" in ln.text for ln in page0)

    def test_two_column_left_before_right(self):
        paper = render_paper(REFS * 6, PaperLayout(columns=2, body_lines=60))
        lines = extract_document(paper.pdf_bytes)
        mid = 612 / 2
        for page in {ln.page_index for ln in lines}:
            page_lines = [ln for ln in lines if ln.page_index == page]
            sides = [0 if ln.bbox.x0 < mid - 10 else 1 for ln in page_lines]
            if 1 in sides:
                first_right = sides.index(1)
                assert all(s == 1 for s in sides[first_right:])

    def test_password_protected_rejected(self):
        with pytest.raises(UnreadableDocument, match="encrypt"):
            extract_document(encrypted_pdf())

    def test_image_only_pdf_rejected(self):
        with pytest.raises(EmptyDocument):
            extract_document(image_only_pdf())

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(UnreadableDocument):
            extract_document(tmp_path / "not-there.pdf")

    def test_repeated_headers_stripped(self):
        paper = render_paper(
            REFS * 10,
            PaperLayout(columns=1, body_lines=80,
                        header_text="Running Head: Synthetic Paper"),
        )
        assert paper.page_count >= 3
        lines = extract_document(paper.pdf_bytes)
        assert not any("Running Head" in ln.text for ln in lines)

    def test_no_linebreaks_or_double_spaces_in_lines(self):
        paper = render_paper(REFS, PaperLayout(columns=1))
        for ln in extract_document(paper.pdf_bytes):
            assert "\n" not in ln.text
            assert "  " not in ln.text
            assert ln.text == ln.text.strip()

    def test_deterministic_across_runs(self):
        paper = render_paper(REFS, PaperLayout(columns=2, body_lines=30))
        first = extract_document(paper.pdf_bytes)
        second = extract_document(paper.pdf_bytes)
        assert first == second

    def test_bboxes_inside_media_box(self):
        paper = render_paper(REFS * 4, PaperLayout(columns=2, body_lines=40))
        for ln in extract_document(paper.pdf_bytes):
            assert -1.0 <= ln.bbox.x0 <= ln.bbox.x1 <= 612 + 1.0
            assert -1.0 <= ln.bbox.y0 <= ln.bbox.y1 <= 792 + 1.0


class TestLocateReferenceSection:
    def test_golden_region_heading_plus_ten_lines_then_appendix(self):
        lines = (
            [make_line("Body text before.", y=760)]
            + [make_line("References", y=740)]
            + [make_line(f"Entry line {i}", y=730 - 10 * i) for i in range(10)]
            + [make_line("Appendix A Extra Proofs", y=600)]
            + [make_line("More appendix text.", y=590)]
        )
        region = locate_reference_section(lines)
        assert region.heading_line.text == "References"
        assert len(region.lines) == 10
        assert region.lines[0].text == "Entry line 0"
        assert region.lines[-1].text == "Entry line 9"

    def test_last_heading_occurrence_wins(self):
        lines = (
            [make_line("References", y=780)]  # TOC-style early mention
            + [make_line("Intro text.", y=770)]
            + [make_line("7 References", y=700)]
            + [make_line("Real entry one.", y=690)]
        )
        region = locate_reference_section(lines)
        assert region.heading_line.text == "7 References"
        assert [ln.text for ln in region.lines] == ["Real entry one."]

    def test_bibliography_variant_and_numbering(self):
        lines = [make_line("IX. Bibliography", y=700), make_line("Entry.", y=690)]
        region = locate_reference_section(lines)
        assert len(region.lines) == 1

    def test_no_heading_raises(self):
        with pytest.raises(NoReferenceSection):
            locate_reference_section([make_line("Nothing to see here.")])

    def test_author_line_does_not_terminate_region(self):
        lines = [
            make_line("References", y=700),
            make_line("A. Gupta, B. Singh and C. Kumar. 2019. Some", y=690),
            make_line("title of a paper. In Proc. of X.", y=680, x0=68.0),
        ]
        region = locate_reference_section(lines)
        assert len(region.lines) == 2

    def test_supplementary_heading_terminates(self):
        lines = [
            make_line("References", y=700),
            make_line("Only entry.", y=690),
            make_line("Supplementary Material", y=680),
            make_line("Extra.", y=670),
        ]
        region = locate_reference_section(lines)
        assert [ln.text for ln in region.lines] == ["Only entry."]

    def test_pdf_level_region_matches_rendered_references(self):
        paper = render_paper(REFS, PaperLayout(columns=1, body_lines=10))
        lines = extract_document(paper.pdf_bytes)
        region = locate_reference_section(lines)
        assert region.heading_line.text == "References"
        assert not any("Appendix" in ln.text for ln in region.lines)
        assert not any("1 Introduction" in ln.text for ln in region.lines)


class TestSegmentEntries:
    def region(self, lines):
        return ReferenceRegion(lines=lines, heading_line=make_line("References"))

    def test_bracket_markers_stripped(self):
        lines = [
            make_line("[1] First entry text continues", y=700),
            make_line("onto a second line.", y=690),
            make_line("[2] Second entry.", y=680),
            make_line("[3] Third entry.", y=670),
        ]
        cites = segment_entries(self.region(lines))
        assert [c.raw_text for c in cites] == [
            "First entry text continues onto a second line.",
            "Second entry.",
            "Third entry.",
        ]

    def test_hyphenation_repaired_only_between_lowercase(self):
        lines = [
            make_line("Detecting halluci-", y=700),
            make_line("nated citations with Bi-", y=690, x0=68.0),
            make_line("LSTM models.", y=680, x0=68.0),
        ]
        cites = segment_entries(self.region(lines))
        assert len(cites) == 1
        assert cites[0].raw_text == "Detecting hallucinated citations with Bi-LSTM models."

    def test_hanging_indent_segmentation(self):
        lines = [
            make_line("Alpha Beta. 2019. One.", y=700, x0=54.0),
            make_line("continuation of one.", y=690, x0=68.0),
            make_line("Gamma Delta. 2020. Two.", y=680, x0=54.0),
        ]
        cites = segment_entries(self.region(lines))
        assert [c.raw_text for c in cites] == [
            "Alpha Beta. 2019. One. continuation of one.",
            "Gamma Delta. 2020. Two.",
        ]

    def test_author_year_fallback_when_flat_margins(self):
        lines = [
            make_line("Alpha, B. 2019. One title here. In Proc. of X.", y=700),
            make_line("Gamma, D. 2020. Two titles there. In Proc. of Y.", y=690),
        ]
        cites = segment_entries(self.region(lines))
        assert len(cites) == 2

    def test_partition_every_line_used_exactly_once(self):
        paper = render_paper(REFS * 8, PaperLayout(columns=2, body_lines=60))
        lines = extract_document(paper.pdf_bytes)
        region = locate_reference_section(lines)
        cites = segment_entries(region)
        assert sum(len(c.bboxes) for c in cites) == len(region.lines)

    def test_cross_page_entry_has_boxes_on_distinct_pages(self):
        paper = render_paper(REFS * 8, PaperLayout(columns=1, body_lines=100))
        cites = segment_entries(
            locate_reference_section(extract_document(paper.pdf_bytes))
        )
        cross = [c for c in cites if len({b.page_index for b in c.bboxes}) > 1]
        assert cross, "fixture should contain at least one page-straddling entry"
        for c in cross:
            assert len(c.bboxes) >= 2

    def test_raw_text_invariants(self):
        paper = render_paper(REFS * 5, PaperLayout(columns=2, body_lines=30))
        cites = segment_entries(
            locate_reference_section(extract_document(paper.pdf_bytes))
        )
        for c in cites:
            assert "\n" not in c.raw_text
            assert c.raw_text == c.raw_text.strip()
            assert "  " not in c.raw_text

    def test_round_trip_exact_reference_strings(self):
        for style in ("hanging", "bracket", "numbered"):
            for columns in (1, 2):
                paper = render_paper(REFS, PaperLayout(style=style, columns=columns))
                cites = segment_entries(
                    locate_reference_section(extract_document(paper.pdf_bytes))
                )
                assert [c.raw_text for c in cites] == REFS, (style, columns)

    def test_empty_region_yields_no_entries(self):
        assert segment_entries(self.region([])) == []

    def test_numbered_markers_not_confused_by_years(self):
        lines = [
            make_line("1. First entry about things from", y=700),
            make_line("1999. More of the first entry.", y=690),
            make_line("2. Second entry.", y=680),
        ]
        cites = segment_entries(self.region(lines))
        assert len(cites) == 2
        assert cites[0].raw_text.startswith("First entry")
        assert "1999. More of the first entry." in cites[0].raw_text
