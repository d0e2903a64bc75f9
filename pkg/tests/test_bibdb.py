"""Tests for database ingestion, persistence, loading and version pinning."""

import random

import pytest

from citecheck import bibdb
from citecheck.errors import (
    CorruptDatabase,
    LockfileMissing,
    ManifestMismatch,
    MissingTitleColumn,
)


def write_tsv(path, rows, header=("id", "title")):
    lines = ["\t".join(header)] + ["\t".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestIngest:
    def test_happy_path_three_rows(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "First Title"), ("a2", "Second Title"), ("a3", "Third Title")])
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 3
        assert res.manifest.db_name == "acl"
        assert res.manifest.version.startswith("sha256:")
        assert (tmp_path / "db" / "entries.tsv").exists()
        assert (tmp_path / "db" / "manifest.txt").exists()

    def test_missing_title_column(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "x")], header=("id", "name"))
        with pytest.raises(MissingTitleColumn):
            bibdb.ingest(src, "acl", tmp_path / "db")

    def test_empty_title_rows_skipped_and_counted(self, tmp_path):
        src = tmp_path / "src.tsv"
        rows = [(f"a{i}", f"Title number {i}") for i in range(9)]
        rows.insert(4, ("a-empty", "   "))
        write_tsv(src, rows)
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 9
        assert res.skipped_empty_titles == 1

    def test_punctuation_only_title_counts_as_empty(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "Real Title"), ("a2", "!!! ---")])
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 1
        assert res.skipped_empty_titles == 1

    def test_malformed_row_reported_with_line_number(self, tmp_path):
        src = tmp_path / "src.tsv"
        src.write_text("id\ttitle\na1\tGood Title\nonlyonecell\na3\tAlso Good\n")
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 2
        assert len(res.malformed_rows) == 1
        assert "line 3" in res.malformed_rows[0]

    def test_ids_synthesized_when_missing(self, tmp_path):
        src = tmp_path / "src.tsv"
        src.write_text("title\nOnly Title Here\nA Second One\n")
        res = bibdb.ingest(src, "arxiv", tmp_path / "db")
        db = bibdb.load(tmp_path / "db")
        assert db.ids == ["arxiv-00000001", "arxiv-00000002"]

    def test_duplicate_ids_tallied_not_fatal(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "First"), ("a1", "Second")])
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 1
        assert any("duplicate id" in m for m in res.malformed_rows)

    def test_duplicate_normalized_titles_allowed_with_distinct_ids(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "Same Title"), ("a2", "Same  Title!")])
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        assert res.manifest.entry_count == 2

    def test_csv_delimiter_by_extension(self, tmp_path):
        src = tmp_path / "src.csv"
        src.write_text('id,title\na1,"A Title, With Comma"\n')
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        db = bibdb.load(tmp_path / "db")
        assert db.titles == ["A Title, With Comma"]

    def test_delimiter_override(self, tmp_path):
        src = tmp_path / "data.txt"
        src.write_text("id;title\na1;Semicolon Title\n")
        bibdb.ingest(src, "acl", tmp_path / "db", delimiter=";")
        assert bibdb.load(tmp_path / "db").titles == ["Semicolon Title"]


class TestLoadRoundTrip:
    def test_ingest_then_load_preserves_id_title_multiset(self, tmp_path):
        rnd = random.Random(21)
        rows = [
            (f"id{i:04d}", f"Title {rnd.randint(0, 10 ** 6)} entry {i}")
            for i in range(50)
        ]
        src = tmp_path / "src.tsv"
        write_tsv(src, rows)
        res = bibdb.ingest(src, "acl", tmp_path / "db")
        db = bibdb.load(tmp_path / "db")
        assert db.entry_count == 50
        assert sorted(zip(db.ids, db.titles)) == sorted(rows)
        assert db.manifest.version == res.manifest.version

    def test_version_is_order_independent(self, tmp_path):
        rows = [("b2", "Second Title"), ("a1", "First Title"), ("c3", "Third Title")]
        src1, src2 = tmp_path / "s1.tsv", tmp_path / "s2.tsv"
        write_tsv(src1, rows)
        write_tsv(src2, list(reversed(rows)))
        v1 = bibdb.ingest(src1, "acl", tmp_path / "db1").manifest.version
        v2 = bibdb.ingest(src2, "acl", tmp_path / "db2").manifest.version
        assert v1 == v2

    def test_version_changes_with_content(self, tmp_path):
        src1, src2 = tmp_path / "s1.tsv", tmp_path / "s2.tsv"
        write_tsv(src1, [("a1", "Title One")])
        write_tsv(src2, [("a1", "Title Two")])
        v1 = bibdb.ingest(src1, "acl", tmp_path / "db1").manifest.version
        v2 = bibdb.ingest(src2, "acl", tmp_path / "db2").manifest.version
        assert v1 != v2

    def test_hand_edited_manifest_detected(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "A Title")])
        bibdb.ingest(src, "acl", tmp_path / "db")
        mpath = tmp_path / "db" / "manifest.txt"
        text = mpath.read_text().replace("version: sha256:", "version: sha256:0000")
        mpath.write_text(text)
        with pytest.raises(ManifestMismatch):
            bibdb.load(tmp_path / "db")

    def test_tampered_entries_detected(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "A Title")])
        bibdb.ingest(src, "acl", tmp_path / "db")
        epath = tmp_path / "db" / "entries.tsv"
        epath.write_text(epath.read_text().replace("A Title", "B Title"))
        with pytest.raises(CorruptDatabase):
            bibdb.load(tmp_path / "db")

    def test_normalization_rule_mismatch_refuses_to_load(self, tmp_path):
        src = tmp_path / "src.tsv"
        write_tsv(src, [("a1", "A Title")])
        bibdb.ingest(src, "acl", tmp_path / "db")
        mpath = tmp_path / "db" / "manifest.txt"
        mpath.write_text(
            mpath.read_text().replace("normalization_rule: nrm-1",
                                      "normalization_rule: nrm-0")
        )
        with pytest.raises(CorruptDatabase, match="normalization rule"):
            bibdb.load(tmp_path / "db")

    def test_load_missing_dir(self, tmp_path):
        with pytest.raises(CorruptDatabase):
            bibdb.load(tmp_path / "nope")


class TestPinning:
    def _ingest(self, tmp_path, name, rows):
        src = tmp_path / f"{name}.tsv"
        write_tsv(src, rows)
        return bibdb.ingest(src, name, tmp_path / name).manifest

    def test_matching_versions_pass(self, tmp_path):
        m1 = self._ingest(tmp_path, "acl", [("a1", "One Title")])
        m2 = self._ingest(tmp_path, "dblp", [("d1", "Two Title")])
        lock = tmp_path / "pins.lock"
        bibdb.write_lockfile([m1, m2], lock)
        report = bibdb.pin_check([m1, m2], lock)
        assert report.passed
        assert all(c.ok for c in report.checks)

    def test_stale_db_fails_naming_both_versions(self, tmp_path):
        m1 = self._ingest(tmp_path, "acl", [("a1", "One Title")])
        lock = tmp_path / "pins.lock"
        bibdb.write_lockfile([m1], lock)
        m1b = self._ingest(tmp_path, "acl", [("a1", "One Title"), ("a2", "New Title")])
        report = bibdb.pin_check([m1b], lock)
        assert not report.passed
        bad = [c for c in report.checks if not c.ok]
        assert len(bad) == 1
        assert bad[0].db_name == "acl"
        assert bad[0].expected == m1.version
        assert bad[0].actual == m1b.version
        assert bad[0].expected != bad[0].actual

    def test_empty_lockfile_passes_with_warning(self, tmp_path):
        m1 = self._ingest(tmp_path, "acl", [("a1", "One Title")])
        lock = tmp_path / "pins.lock"
        lock.write_text("")
        report = bibdb.pin_check([m1], lock)
        assert report.passed
        assert "no pins declared" in report.warnings

    def test_missing_lockfile(self, tmp_path):
        with pytest.raises(LockfileMissing):
            bibdb.pin_check([], tmp_path / "absent.lock")

    def test_unpinned_loaded_db_warns(self, tmp_path):
        m1 = self._ingest(tmp_path, "acl", [("a1", "One Title")])
        m2 = self._ingest(tmp_path, "dblp", [("d1", "Two Title")])
        lock = tmp_path / "pins.lock"
        bibdb.write_lockfile([m1], lock)
        report = bibdb.pin_check([m1, m2], lock)
        assert report.passed
        assert any("dblp" in w for w in report.warnings)
