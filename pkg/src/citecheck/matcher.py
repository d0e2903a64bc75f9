"""Title matching against bibliographic databases.

Matching is title-keyed: the citation title and every stored title are put
through the same normalization, then compared by normalized Levenshtein
similarity (1 minus edit distance over the longer length).  A citation is
considered verified when its best database entry scores at or above the
threshold (default 0.9).  ``find_best_match`` always returns the exact
global best entry, identical to an exhaustive scan; the indexed scan is an
optimization only.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import _kernels
from .errors import EmptyDatabase
from .model import Citation, CitationStatus, MatchResult

if TYPE_CHECKING:  # pragma: no cover
    from .bibdb import BibDatabase

#: Bump when normalize_title changes behavior; stamped into DB manifests so
#: stale databases refuse to load instead of silently mismatching.
NORMALIZATION_RULE = "nrm-1"

_DASHES = dict.fromkeys(map(ord, "‐‑‒–—―−"), "-")
_QUOTES = {
    0x2018: "'",
    0x2019: "'",
    0x201A: "'",
    0x201B: "'",
    0x201C: '"',
    0x201D: '"',
    0x201E: '"',
    0x201F: '"',
}
_TRANSLATE = {**_DASHES, **_QUOTES}
_NON_ALNUM = re.compile(r"[\W_]+", re.UNICODE)


def normalize_title(s: str) -> str:
    """Canonicalize a title for matching.

    Compatibility-normalizes Unicode, folds case, strips diacritics to base
    letters, maps dash/quote variants to ASCII, then collapses every
    non-alphanumeric run (hyphens and punctuation included) to a single
    space.  Both query titles and stored titles go through this one
    function; it is the single normalization authority in the toolkit.
    """
    if not s:
        return ""
    if not s.isascii():
        s = s.translate(_TRANSLATE)
        s = unicodedata.normalize("NFKD", s)
        s = "".join(ch for ch in s if not unicodedata.combining(ch))
    s = s.casefold()
    return _NON_ALNUM.sub(" ", s).strip()


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insertions, deletions, substitutions)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    cur = [0] * (len(b) + 1)
    for i, ca in enumerate(a, 1):
        cur[0] = i
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur[j] = prev[j - 1]
            else:
                x = prev[j]
                y = cur[j - 1]
                z = prev[j - 1]
                best = x if x < y else y
                if z < best:
                    best = z
                cur[j] = best + 1
        prev, cur = cur, prev
    return prev[len(b)]


def similarity(a: str, b: str) -> float:
    """Normalized Levenshtein similarity in [0, 1]; 1.0 iff the strings are equal."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


@dataclass(frozen=True)
class MatcherConfig:
    """Tuning knobs for database matching.

    ``max_candidates`` caps how many entries the scan fully evaluates
    (entries skipped by the length bound do not count).  It exists as a
    hard latency stop for service deployments; at the default of 0
    (unlimited) the result is guaranteed identical to an exhaustive scan.
    """

    threshold: float = 0.9
    max_candidates: int = 0
    db_ref: str = ""

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.max_candidates < 0:
            raise ValueError("max_candidates must be >= 0")


def find_best_match(title: str, db: "BibDatabase", cfg: MatcherConfig | None = None) -> MatchResult:
    """Return the database entry most similar to ``title``.

    The returned score is exactly ``similarity(normalize_title(title),
    entry.normalized_title)`` maximized over all entries, with ties broken
    by lexicographically smallest entry id.  On a failed match the best
    score is reported but the entry identity is withheld.
    """
    if cfg is None:
        cfg = MatcherConfig()
    if not title:
        raise ValueError("find_best_match requires a non-empty title")
    if db.entry_count == 0:
        raise EmptyDatabase(f"database {db.name!r} has no entries")

    q = normalize_title(title)
    if not q:
        # Every entry is equally dissimilar; the smallest id wins at score 0.
        idx, score = 0, 0.0
    else:
        idx = db.exact_index(q)
        if idx >= 0:
            score = 1.0
        else:
            qchars, peq, m = _kernels.build_pattern(q)
            idx, dist, _ = _kernels.scan_best(
                qchars,
                peq,
                m,
                db.flat_codes,
                db.offsets,
                db.lengths,
                max_eval=cfg.max_candidates,
            )
            score = 1.0 - dist / max(m, int(db.lengths[idx]))

    matched = score >= cfg.threshold
    return MatchResult(
        matched=matched,
        score=score,
        db_name=db.name,
        matched_id=db.ids[idx] if matched else "",
        matched_title=db.titles[idx] if matched else "",
    )


def verify(
    citations: list[Citation], db: "BibDatabase", cfg: MatcherConfig | None = None
) -> list[Citation]:
    """Filter out citations whose title matches the database.

    Returns, in input order, exactly the citations left unmatched; each one
    carries its best-effort :class:`MatchResult`.  Matched citations are
    dropped from the output with status ``verified``.  Calls compose:
    chaining ``verify`` over several databases flags only citations that no
    database could confirm.
    """
    if cfg is None:
        cfg = MatcherConfig()
    if not citations:
        return []
    if db.entry_count == 0:
        raise EmptyDatabase(f"database {db.name!r} has no entries")
    remaining: list[Citation] = []
    for c in citations:
        if c.status is not CitationStatus.RECOGNIZED:
            raise ValueError(
                f"verify expects recognized citations, got status {c.status.value!r}"
            )
        result = find_best_match(c.title, db, cfg)
        if not result.matched:
            remaining.append(c.replace(match=result))
    return remaining
