"""Tests for tokenization, the rule labeler and field assembly."""

import random
import string

import pytest

from citecheck.errors import LengthMismatch, ModelUnavailable, RecognitionError
from citecheck.model import Citation, CitationStatus, FieldTag
from citecheck.recognizer import (
    FileBackedLabeler,
    RuleLabeler,
    assemble_fields,
    get_labeler,
    label_tokens,
    parse,
    parse_batch,
    register_labeler,
    tokenize,
)


class TestTokenize:
    def test_punctuation_becomes_standalone_tokens(self):
        assert [t.text for t in tokenize("Doe, J. 2020.")] == [
            "Doe", ",", "J", ".", "2020", ".",
        ]

    def test_single_token(self):
        assert [t.text for t in tokenize("A")] == ["A"]

    def test_dash_joined_numerals_stay_together(self):
        assert [t.text for t in tokenize("pp. 1–10")] == ["pp", ".", "1–10"]

    def test_quotes_split(self):
        assert [t.text for t in tokenize('"Title," said')] == [
            '"', "Title", ",", '"', "said",
        ]

    def test_offsets_reslice_raw_text(self):
        rnd = random.Random(31)
        alphabet = string.ascii_letters + string.digits + ' .,:;()"-“”–'
        for _ in range(300):
            raw = "".join(rnd.choices(alphabet, k=rnd.randint(1, 80)))
            tokens = tokenize(raw)
            last_end = 0
            for tok in tokens:
                assert raw[tok.start_char : tok.end_char] == tok.text
                assert tok.start_char >= last_end
                last_end = tok.end_char
            assert "".join(t.text for t in tokens) == re.sub(r"\s+", "", raw) \
                if False else True  # concatenation modulo gaps checked below
            rebuilt = "".join(t.text for t in tokens)
            assert rebuilt == re.sub(r"\s", "", raw)

    def test_shape_descriptor(self):
        tokens = tokenize("Proc 2020 Bi-LSTM ...")
        shapes = {t.text: t.shape for t in tokens}
        assert shapes["Proc"] == "Aa"
        assert shapes["2020"] == "d"
        assert shapes["Bi-LSTM"] == "AapA"


import re  # noqa: E402  (used by the property above)


class TestRuleLabeler:
    def label_map(self, raw):
        tokens = tokenize(raw)
        tags = label_tokens(tokens, RuleLabeler())
        return tokens, tags, list(zip([t.text for t in tokens], [t.value for t in tags]))

    def test_acl_style_golden(self):
        raw = "John Doe. 2020. A Great Title. In Proc. of X."
        _, _, pairs = self.label_map(raw)
        by_token = dict()
        for text, tag in pairs:
            by_token.setdefault(text, tag)
        assert by_token["John"] == "author"
        assert by_token["Doe"] == "author"
        assert by_token["2020"] == "date"
        assert by_token["A"] == "title"
        assert by_token["Great"] == "title"
        assert by_token["Title"] == "title"
        assert by_token["In"] == "other"
        assert by_token["Proc"] == "booktitle"
        assert by_token["X"] == "booktitle"

    def test_all_numeric_stream(self):
        _, tags, pairs = self.label_map("2020 12 34")
        assert pairs[0] == ("2020", "date")
        assert pairs[1] == ("12", "other")
        assert pairs[2] == ("34", "other")

    def test_pathological_token_is_other(self):
        _, tags, _ = self.label_map("…")
        assert tags == [FieldTag.OTHER]

    def test_tag_set_closure_on_random_inputs(self):
        rnd = random.Random(33)
        alphabet = string.ascii_letters + string.digits + ' .,:;()"-'
        labeler = RuleLabeler()
        for _ in range(200):
            raw = "".join(rnd.choices(alphabet, k=rnd.randint(1, 60)))
            tokens = tokenize(raw)
            if not tokens:
                continue
            tags = label_tokens(tokens, labeler)
            assert len(tags) == len(tokens)
            assert all(isinstance(t, FieldTag) for t in tags)

    def test_deterministic(self):
        raw = "Doe, J., & Smith, A. B. (2020). Some title here. Journal of X, 3(2), 1-9."
        tokens = tokenize(raw)
        labeler = RuleLabeler()
        first = label_tokens(tokens, labeler)
        for _ in range(5):
            assert label_tokens(tokens, labeler) == first

    def test_quoted_title_overrides_position(self):
        raw = 'J. Doe, "A quoted style title," in Proc. of Things, 2019.'
        c = parse(Citation(raw_text=raw))
        assert c.title == "A quoted style title"

    def test_year_late_ieee_style(self):
        raw = 'T. Brown and M. Green, "Learning to cite correctly," in Proc. of the Conf. on Examples, 2019, pp. 1-8.'
        c = parse(Citation(raw_text=raw))
        assert c.title == "Learning to cite correctly"
        assert c.fields[FieldTag.DATE] == "2019"
        assert "pp. 1-8" in c.fields[FieldTag.PAGES]

    def test_arxiv_reference(self):
        raw = "Ann Lee. 2021. Modeling references with care. arXiv preprint arXiv:2101.12345."
        c = parse(Citation(raw_text=raw))
        assert c.title == "Modeling references with care"
        assert c.fields[FieldTag.PUBNUM] == "arXiv:2101.12345"

    def test_subtitle_after_colon_included(self):
        raw = "A. Author. 2020. Main title: the subtitle too. In Proceedings of X."
        c = parse(Citation(raw_text=raw))
        assert c.title == "Main title: the subtitle too"


class TestAssembleFields:
    def tags_for(self, raw, mapping):
        """Build a tag list by token text lookup (first match wins)."""
        tokens = tokenize(raw)
        tags = []
        used = {}
        for tok in tokens:
            options = mapping.get(tok.text, FieldTag.OTHER)
            if isinstance(options, list):
                k = used.get(tok.text, 0)
                used[tok.text] = k + 1
                tags.append(options[min(k, len(options) - 1)])
            else:
                tags.append(options)
        return tokens, tags

    def test_single_title_run(self):
        raw = "One fine title here"
        tokens, tags = self.tags_for(raw, {
            "One": FieldTag.TITLE, "fine": FieldTag.TITLE,
            "title": FieldTag.TITLE, "here": FieldTag.TITLE,
        })
        c = assemble_fields(Citation(raw_text=raw), tags)
        assert c.title == "One fine title here"
        assert c.status is CitationStatus.RECOGNIZED

    def test_longest_title_run_wins(self):
        raw = "aa bb cc dd x one two three four five six seven"
        tags = [FieldTag.TITLE] * 4 + [FieldTag.OTHER] + [FieldTag.TITLE] * 7
        c = assemble_fields(Citation(raw_text=raw), tags)
        assert c.title == "one two three four five six seven"

    def test_tie_goes_to_earliest_run(self):
        raw = "aa bb x cc dd"
        tags = [FieldTag.TITLE, FieldTag.TITLE, FieldTag.OTHER,
                FieldTag.TITLE, FieldTag.TITLE]
        c = assemble_fields(Citation(raw_text=raw), tags)
        assert c.title == "aa bb"

    def test_no_title_means_unverifiable(self):
        raw = "Doe 2020"
        tags = [FieldTag.AUTHOR, FieldTag.DATE]
        c = assemble_fields(Citation(raw_text=raw), tags)
        assert c.title == ""
        assert c.status is CitationStatus.UNVERIFIABLE

    def test_length_mismatch_raises(self):
        with pytest.raises(LengthMismatch):
            assemble_fields(Citation(raw_text="a b c"), [FieldTag.OTHER])

    def test_spans_reslice_raw_text(self):
        raw = "John Doe. 2020. A Great Title. In Proc. of X."
        c = parse(Citation(raw_text=raw))
        for span in c.spans:
            assert raw[span.start_char : span.end_char] == span.text

    def test_fields_join_repeated_tags_in_order(self):
        raw = "aa bb x cc dd"
        tags = [FieldTag.PAGES, FieldTag.PAGES, FieldTag.OTHER,
                FieldTag.PAGES, FieldTag.PAGES]
        c = assemble_fields(Citation(raw_text=raw), tags)
        assert c.fields[FieldTag.PAGES] == "aa bb cc dd"

    def test_title_choice_ignores_non_title_tags(self):
        raw = "one two three x five six"
        base = [FieldTag.TITLE, FieldTag.TITLE, FieldTag.TITLE,
                FieldTag.OTHER, FieldTag.AUTHOR, FieldTag.AUTHOR]
        permuted = [FieldTag.TITLE, FieldTag.TITLE, FieldTag.TITLE,
                    FieldTag.OTHER, FieldTag.PAGES, FieldTag.JOURNAL]
        c1 = assemble_fields(Citation(raw_text=raw), base)
        c2 = assemble_fields(Citation(raw_text=raw), permuted)
        assert c1.title == c2.title == "one two three"


class _ExplodingLabeler:
    name = "exploding"
    version = "0"

    def label(self, tokens):
        raise RuntimeError("boom")


class TestParseBatch:
    def extracted(self, raw):
        return Citation(raw_text=raw)

    def test_empty_batch(self):
        assert parse_batch([]) == []

    def test_order_preserved_on_batch_of_50(self):
        cs = [
            self.extracted(f"Author {i}. 2020. Title number {i} of many. In Proc. of X.")
            for i in range(50)
        ]
        out = parse_batch(cs)
        assert len(out) == 50
        assert [c.raw_text for c in out] == [c.raw_text for c in cs]

    def test_batch_equivalent_to_single_path(self):
        rnd = random.Random(37)
        cs = []
        for i in range(30):
            year = rnd.randint(1990, 2024)
            cs.append(self.extracted(
                f"Person {i} and Other {i}. {year}. Title {i} about things. "
                f"In Proceedings of the Conference, pages {i}-{i + 9}."
            ))
        assert parse_batch(cs) == [parse(c) for c in cs]

    def test_error_carries_offending_index(self):
        cs = [self.extracted("Good. 2020. Fine title. In Proc. of X.") for _ in range(3)]
        with pytest.raises(RecognitionError) as err:
            parse_batch(cs, _ExplodingLabeler())
        assert err.value.citation_index == 0

    def test_wrong_status_rejected(self):
        c = Citation(raw_text="x", status=CitationStatus.RECOGNIZED)
        with pytest.raises(ValueError):
            parse_batch([c])

    def test_status_transitions_are_forward_only(self):
        cs = [
            self.extracted("John Doe. 2020. A Great Title. In Proc. of X."),
            self.extracted("???"),
        ]
        out = parse_batch(cs)
        assert out[0].status is CitationStatus.RECOGNIZED
        assert out[1].status is CitationStatus.UNVERIFIABLE


class TestLabelerPlumbing:
    def test_file_backed_labeler_requires_weights(self, tmp_path):
        class TinyModel(FileBackedLabeler):
            name = "tiny"
            version = "1"

        with pytest.raises(ModelUnavailable):
            TinyModel(tmp_path / "missing-weights")
        (tmp_path / "weights.bin").write_bytes(b"\x00")
        model = TinyModel(tmp_path / "weights.bin")
        assert model.name == "tiny"

    def test_registry_lookup(self):
        assert get_labeler().name == "cueword-rules"
        assert get_labeler("heuristic").name == "cueword-rules"
        with pytest.raises(LookupError):
            get_labeler("nonexistent-model")

    def test_register_custom_labeler(self):
        class Constant:
            name = "constant"
            version = "1"

            def label(self, tokens):
                return [FieldTag.OTHER] * len(tokens)

        register_labeler("constant", Constant())
        assert get_labeler("constant").name == "constant"

    def test_contract_violations_surface(self):
        class ShortLabeler:
            name = "short"
            version = "1"

            def label(self, tokens):
                return [FieldTag.OTHER]

        tokens = tokenize("a b c")
        with pytest.raises(LengthMismatch):
            label_tokens(tokens, ShortLabeler())
