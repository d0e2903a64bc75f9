"""Tests for the shared citation data model."""

import pytest

from citecheck.errors import MissingField, UnknownField
from citecheck.model import (
    BoundingBox,
    Citation,
    CitationStatus,
    FieldTag,
    LabeledSpan,
    MatchResult,
    StageTiming,
    Stage,
    citation_from_record,
    render_citation,
)


def make_recognized_citation() -> Citation:
    raw = "John Doe. 2020. A Great Title. In Proc. of X."
    return Citation(
        raw_text=raw,
        bboxes=[BoundingBox(0, 72.0, 700.0, 300.0, 712.0)],
        spans=[
            LabeledSpan(FieldTag.AUTHOR, 0, 8, raw[0:8]),
            LabeledSpan(FieldTag.DATE, 10, 14, raw[10:14]),
            LabeledSpan(FieldTag.TITLE, 16, 29, raw[16:29]),
        ],
        title="A Great Title",
        fields={
            FieldTag.AUTHOR: "John Doe",
            FieldTag.DATE: "2020",
            FieldTag.TITLE: "A Great Title",
        },
        status=CitationStatus.RECOGNIZED,
    )


class TestFieldTag:
    def test_tag_set_is_closed_at_19_values(self):
        assert len(FieldTag) == 19
        assert FieldTag.OTHER in FieldTag
        with pytest.raises(ValueError):
            FieldTag("color")

    def test_expected_tags_present(self):
        names = {t.value for t in FieldTag}
        assert names == {
            "author", "booktitle", "collaboration", "date", "editor",
            "institution", "issue", "journal", "location", "note", "pages",
            "publisher", "pubnum", "series", "tech", "title", "volume",
            "web", "other",
        }


class TestBoundingBox:
    def test_rejects_inverted_corners(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 10.0, 0.0, 5.0, 1.0)
        with pytest.raises(ValueError):
            BoundingBox(0, 0.0, 10.0, 5.0, 1.0)

    def test_rejects_negative_page(self):
        with pytest.raises(ValueError):
            BoundingBox(-1, 0.0, 0.0, 1.0, 1.0)


class TestLabeledSpan:
    def test_rejects_empty_or_reversed_span(self):
        with pytest.raises(ValueError):
            LabeledSpan(FieldTag.TITLE, 5, 5, "")
        with pytest.raises(ValueError):
            LabeledSpan(FieldTag.TITLE, 6, 5, "x")


class TestMatchResult:
    def test_matched_requires_db_name(self):
        with pytest.raises(ValueError):
            MatchResult(matched=True, score=0.95)

    def test_unmatched_must_not_name_an_entry(self):
        with pytest.raises(ValueError):
            MatchResult(matched=False, score=0.4, matched_id="x1")

    def test_score_bounds(self):
        with pytest.raises(ValueError):
            MatchResult(matched=False, score=1.5)


class TestCitationFromRecord:
    def test_minimal_valid_record(self):
        c = citation_from_record({"raw_text": "Doe 2020. A Title."})
        assert c.status is CitationStatus.EXTRACTED
        assert c.bboxes == []
        assert c.title == ""

    def test_empty_raw_text_rejected(self):
        with pytest.raises(MissingField):
            citation_from_record({"raw_text": ""})
        with pytest.raises(MissingField):
            citation_from_record({})

    def test_unknown_key_rejected(self):
        with pytest.raises(UnknownField):
            citation_from_record({"raw_text": "x", "color": "red"})

    def test_span_must_reslice_raw_text(self):
        rec = {
            "raw_text": "abcdef",
            "spans": [{"tag": "title", "start_char": 0, "end_char": 3, "text": "xyz"}],
        }
        with pytest.raises(MissingField):
            citation_from_record(rec)

    def test_round_trip_preserves_every_field(self):
        c = make_recognized_citation().replace(
            match=MatchResult(matched=True, score=0.97, db_name="acl",
                              matched_id="P1", matched_title="A Great Title"),
            status=CitationStatus.VERIFIED,
        )
        again = citation_from_record(c.to_record())
        assert again == c

    def test_round_trip_unmatched_and_unverifiable(self):
        c = Citation(raw_text="mystery entry", status=CitationStatus.UNVERIFIABLE)
        assert citation_from_record(c.to_record()) == c
        c2 = make_recognized_citation().replace(
            match=MatchResult(matched=False, score=0.41, db_name="acl")
        )
        assert citation_from_record(c2.to_record()) == c2


class TestRenderCitation:
    def test_minimal_verbosity_is_raw_text(self):
        c = Citation(raw_text="R")
        assert render_citation(c, "minimal") == "R"

    def test_full_verbosity_has_author_and_title_lines(self):
        c = make_recognized_citation().replace(
            match=MatchResult(matched=False, score=0.35, db_name="acl")
        )
        text = render_citation(c, "full")
        assert "author: John Doe" in text
        assert "title: A Great Title" in text
        assert "no match (score 0.3500" in text

    def test_full_verbosity_lists_every_bbox(self):
        c = Citation(
            raw_text="split entry",
            bboxes=[
                BoundingBox(0, 72.0, 80.0, 300.0, 92.0),
                BoundingBox(1, 72.0, 700.0, 280.0, 712.0),
            ],
        )
        text = render_citation(c, "full")
        assert "page 0: (72.00, 80.00, 300.00, 92.00)" in text
        assert "page 1: (72.00, 700.00, 280.00, 712.00)" in text

    def test_deterministic(self):
        c = make_recognized_citation()
        assert render_citation(c, "full") == render_citation(c, "full")

    def test_unknown_verbosity_rejected(self):
        with pytest.raises(ValueError):
            render_citation(Citation(raw_text="x"), "chatty")


class TestStageTiming:
    def test_rejects_negative_elapsed(self):
        with pytest.raises(ValueError):
            StageTiming(Stage.MATCHER, -1.0, 3)

    def test_record_shape(self):
        t = StageTiming(Stage.TOTAL, 12.5, 50)
        assert t.to_record() == {"stage": "total", "elapsed_ms": 12.5, "unit_count": 50}
