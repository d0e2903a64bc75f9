"""Ingestion, persistence and loading of title-keyed bibliographic databases.

A database on disk is a directory holding two human-inspectable files:

    entries.tsv   id <TAB> title <TAB> normalized_title, sorted by id
    manifest.txt  key: value lines describing the content version

The manifest ``version`` is a content hash over the sorted (id,
normalized_title) pairs, so re-ingesting the same rows in any order yields
the same version.  Verification reports embed these versions, and a
lockfile of (db_name, version) pairs lets authors, reviewers and
organizers confirm they ran against identical data.  There is no automatic
update channel: a new version only ever comes from an explicit re-ingest.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    CorruptDatabase,
    LockfileMissing,
    ManifestMismatch,
    MissingTitleColumn,
)
from .matcher import NORMALIZATION_RULE, normalize_title

logger = logging.getLogger(__name__)

ENTRIES_FILE = "entries.tsv"
MANIFEST_FILE = "manifest.txt"

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class BibEntry:
    id: str
    title: str
    normalized_title: str


@dataclass(frozen=True)
class DbManifest:
    db_name: str
    version: str
    entry_count: int
    created_at: str
    normalization_rule: str
    source_files: tuple[tuple[str, str], ...] = ()

    def to_record(self) -> dict:
        return {
            "db_name": self.db_name,
            "version": self.version,
            "entry_count": self.entry_count,
            "created_at": self.created_at,
            "normalization_rule": self.normalization_rule,
            "source_files": [
                {"path": p, "sha256": h} for p, h in self.source_files
            ],
        }


@dataclass
class IngestResult:
    db_dir: Path
    manifest: DbManifest
    skipped_empty_titles: int = 0
    malformed_rows: list[str] = field(default_factory=list)


def _content_version(pairs: list[tuple[str, str]]) -> str:
    """Hash of the sorted (id, normalized_title) stream; order-independent."""
    h = hashlib.sha256()
    for entry_id, norm in sorted(pairs):
        h.update(entry_id.encode("utf-8"))
        h.update(b"\t")
        h.update(norm.encode("utf-8"))
        h.update(b"\n")
    return "sha256:" + h.hexdigest()


def _file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _clean_cell(text: str) -> str:
    # Titles are stored in a TSV, so embedded tabs/newlines become spaces.
    return _WS.sub(" ", text).strip()


def ingest(
    source: str | Path,
    db_name: str,
    dest: str | Path,
    delimiter: str | None = None,
) -> IngestResult:
    """Ingest a delimited text file into a persisted database.

    The source must carry a header row with at least a ``title`` column; an
    optional ``id`` column supplies entry ids, otherwise ids are
    synthesized from the db name and the row ordinal.  The delimiter is
    inferred from the file extension (``.csv`` vs anything else = tab)
    unless given explicitly.  Rows with an empty or punctuation-only title
    are skipped and counted; rows too short to carry a title cell are
    tallied as malformed with their line number.  Ingestion never aborts on
    bad rows.
    """
    source = Path(source)
    dest = Path(dest)
    if delimiter is None:
        delimiter = "," if source.suffix.lower() == ".csv" else "\t"

    pairs: list[tuple[str, str]] = []
    rows: dict[str, tuple[str, str]] = {}
    skipped_empty = 0
    malformed: list[str] = []

    with open(source, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingTitleColumn(f"{source}: empty file, no header row")
        columns = [h.strip().lower() for h in header]
        if "title" not in columns:
            raise MissingTitleColumn(
                f"{source}: header {columns!r} has no 'title' column"
            )
        title_col = columns.index("title")
        id_col = columns.index("id") if "id" in columns else -1

        for line_no, row in enumerate(reader, start=2):
            if len(row) <= title_col or (id_col >= 0 and len(row) <= id_col):
                malformed.append(f"line {line_no}: expected {len(columns)} columns, got {len(row)}")
                continue
            title = _clean_cell(row[title_col])
            norm = normalize_title(title)
            if not norm:
                skipped_empty += 1
                continue
            if id_col >= 0 and row[id_col].strip():
                entry_id = _clean_cell(row[id_col])
            else:
                entry_id = f"{db_name}-{line_no - 1:08d}"
            if entry_id in rows:
                malformed.append(f"line {line_no}: duplicate id {entry_id!r}")
                continue
            rows[entry_id] = (title, norm)
            pairs.append((entry_id, norm))

    if skipped_empty:
        logger.warning("%s: skipped %d rows with empty titles", source, skipped_empty)
    for msg in malformed:
        logger.warning("%s: %s", source, msg)

    manifest = DbManifest(
        db_name=db_name,
        version=_content_version(pairs),
        entry_count=len(rows),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        normalization_rule=NORMALIZATION_RULE,
        source_files=((str(source), _file_sha256(source)),),
    )

    dest.mkdir(parents=True, exist_ok=True)
    with open(dest / ENTRIES_FILE, "w", encoding="utf-8", newline="\n") as f:
        for entry_id in sorted(rows):
            title, norm = rows[entry_id]
            f.write(f"{entry_id}\t{title}\t{norm}\n")
    _write_manifest(manifest, dest / MANIFEST_FILE)

    return IngestResult(
        db_dir=dest,
        manifest=manifest,
        skipped_empty_titles=skipped_empty,
        malformed_rows=malformed,
    )


def _write_manifest(manifest: DbManifest, path: Path) -> None:
    lines = [
        f"db_name: {manifest.db_name}",
        f"version: {manifest.version}",
        f"entry_count: {manifest.entry_count}",
        f"created_at: {manifest.created_at}",
        f"normalization_rule: {manifest.normalization_rule}",
    ]
    for src, digest in manifest.source_files:
        lines.append(f"source_file: {digest}  {src}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> DbManifest:
    path = Path(path)
    if not path.exists():
        raise CorruptDatabase(f"manifest not found: {path}")
    fields: dict[str, str] = {}
    sources: list[tuple[str, str]] = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or ":" not in line:
            continue
        key, value = line.split(":", 1)
        key = key.strip()
        value = value.strip()
        if key == "source_file":
            digest, _, src = value.partition("  ")
            sources.append((src.strip(), digest.strip()))
        else:
            fields[key] = value
    try:
        return DbManifest(
            db_name=fields["db_name"],
            version=fields["version"],
            entry_count=int(fields["entry_count"]),
            created_at=fields.get("created_at", ""),
            normalization_rule=fields.get("normalization_rule", ""),
            source_files=tuple(sources),
        )
    except KeyError as e:
        raise CorruptDatabase(f"{path}: manifest missing key {e}") from e


class BibDatabase:
    """An immutable, indexed in-memory database of known-work titles.

    Entries are kept sorted by id.  The indexes built at load time (exact
    lookup table, code-point arrays and length array for the scan kernel)
    are derived data only; matching semantics are defined entirely by the
    entry list.
    """

    def __init__(self, name: str, entries: list[BibEntry], manifest: DbManifest):
        self.name = name
        self.manifest = manifest
        self.entries = sorted(entries, key=lambda e: e.id)
        self.ids = [e.id for e in self.entries]
        self.titles = [e.title for e in self.entries]
        self.norms = [e.normalized_title for e in self.entries]
        self._exact: dict[str, int] = {}
        for i, norm in enumerate(self.norms):
            self._exact.setdefault(norm, i)
        joined = "".join(self.norms)
        self.flat_codes = _kernels.encode(joined)
        self.lengths = np.array([len(n) for n in self.norms], dtype=np.int64)
        if len(self.lengths):
            ends = np.cumsum(self.lengths)
            self.offsets = np.concatenate((np.zeros(1, dtype=np.int64), ends[:-1]))
        else:
            self.offsets = np.zeros(0, dtype=np.int64)

    @property
    def entry_count(self) -> int:
        return len(self.entries)

    def exact_index(self, normalized: str) -> int:
        """Index of the smallest-id entry whose normalized title equals the query."""
        return self._exact.get(normalized, -1)

    def __repr__(self) -> str:  # pragma: no cover
        return f"BibDatabase(name={self.name!r}, entries={self.entry_count})"


def load(path: str | Path) -> BibDatabase:
    """Load a persisted database, re-verifying its integrity.

    Every row's stored normalized title is recomputed and compared, which
    catches both file corruption and databases ingested under a different
    normalization rule; the content hash is recomputed and compared against
    the manifest version.
    """
    path = Path(path)
    db_dir = path if path.is_dir() else path.parent
    entries_path = db_dir / ENTRIES_FILE
    if not entries_path.exists():
        raise CorruptDatabase(f"no {ENTRIES_FILE} under {db_dir}")
    manifest = read_manifest(db_dir / MANIFEST_FILE)
    if manifest.normalization_rule != NORMALIZATION_RULE:
        raise CorruptDatabase(
            f"{db_dir}: database was ingested under normalization rule "
            f"{manifest.normalization_rule!r} but this toolkit uses "
            f"{NORMALIZATION_RULE!r}; re-ingest the source"
        )

    entries: list[BibEntry] = []
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(entries_path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorruptDatabase(
                    f"{entries_path}:{line_no}: expected 3 columns, got {len(parts)}"
                )
            entry_id, title, norm = parts
            if normalize_title(title) != norm:
                raise CorruptDatabase(
                    f"{entries_path}:{line_no}: stored normalized title does not "
                    f"match normalize_title({title!r})"
                )
            if entry_id in seen:
                raise CorruptDatabase(
                    f"{entries_path}:{line_no}: duplicate id {entry_id!r}"
                )
            seen.add(entry_id)
            entries.append(BibEntry(entry_id, title, norm))
            pairs.append((entry_id, norm))

    actual_version = _content_version(pairs)
    if actual_version != manifest.version:
        raise ManifestMismatch(
            f"{db_dir}: entry stream hashes to {actual_version} but manifest "
            f"declares {manifest.version}"
        )
    if len(entries) != manifest.entry_count:
        raise ManifestMismatch(
            f"{db_dir}: {len(entries)} entries on disk, manifest declares "
            f"{manifest.entry_count}"
        )
    return BibDatabase(manifest.db_name, entries, manifest)


# --- version pinning ---------------------------------------------------------


@dataclass(frozen=True)
class PinCheck:
    db_name: str
    expected: str
    actual: str

    @property
    def ok(self) -> bool:
        return self.expected == self.actual

    def to_record(self) -> dict:
        return {
            "db_name": self.db_name,
            "expected": self.expected,
            "actual": self.actual,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class PinReport:
    passed: bool
    checks: tuple[PinCheck, ...]
    warnings: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_record() for c in self.checks],
            "warnings": list(self.warnings),
        }


def read_lockfile(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise LockfileMissing(f"lockfile not found: {path}")
    pins: dict[str, str] = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, _, version = line.partition("\t")
        pins[name.strip()] = version.strip()
    return pins


def write_lockfile(manifests: list[DbManifest], path: str | Path) -> None:
    lines = [f"{m.db_name}\t{m.version}" for m in manifests]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def pin_check(manifests: list[DbManifest], lockfile: str | Path) -> PinReport:
    """Compare loaded database versions against a lockfile.

    Passes iff every loaded database whose name appears in the lockfile
    carries exactly the locked version.  An empty lockfile passes
    vacuously with a warning; pins with no corresponding loaded database
    and loaded databases with no pin are warned about but do not fail the
    check.
    """
    pins = read_lockfile(lockfile)
    warnings: list[str] = []
    checks: list[PinCheck] = []
    if not pins:
        warnings.append("no pins declared")
        return PinReport(passed=True, checks=(), warnings=tuple(warnings))
    loaded = {m.db_name: m.version for m in manifests}
    for m in manifests:
        if m.db_name in pins:
            checks.append(PinCheck(m.db_name, pins[m.db_name], m.version))
        else:
            warnings.append(f"database {m.db_name!r} is loaded but not pinned")
    for name in pins:
        if name not in loaded:
            warnings.append(f"pin for {name!r} matches no loaded database")
    passed = all(c.ok for c in checks)
    return PinReport(passed=passed, checks=tuple(checks), warnings=tuple(warnings))
