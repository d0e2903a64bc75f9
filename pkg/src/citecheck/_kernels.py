"""Bit-parallel edit-distance kernels used for database scans.

The scan kernel computes, for one query against every stored title, the
exact Levenshtein distance via the Myers/Hyyro bit-vector recurrence
(word-parallel, multi-block for queries longer than 64 characters) and
keeps the entry with the highest normalized similarity.  Results are
bit-identical to the naive dynamic program; the speedup is purely
mechanical.  When numba is unavailable the pure-Python mirrors below give
the same results, just slower.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


ENGINE = "numba" if HAVE_NUMBA else "python"

_WORD = 64
_TOP = np.uint64(1 << 63)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_FULL = np.uint64(0xFFFFFFFFFFFFFFFF)


def encode(s: str) -> np.ndarray:
    """Encode a string as an array of uint32 code points."""
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)


def build_pattern(query: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Precompute per-character bitmasks for a query pattern.

    Returns ``(qchars, peq, m)`` where ``qchars`` is the sorted array of
    distinct code points in the query and ``peq`` has one row per distinct
    character plus a trailing all-zero row for characters absent from the
    query; each row holds one uint64 bitmask per 64-character block.
    """
    codes = encode(query)
    m = len(codes)
    words = max(1, (m + _WORD - 1) // _WORD)
    qchars = np.unique(codes)
    peq = np.zeros((len(qchars) + 1, words), dtype=np.uint64)
    for i, c in enumerate(codes):
        row = int(np.searchsorted(qchars, c))
        peq[row, i // _WORD] |= np.uint64(1) << np.uint64(i % _WORD)
    return qchars, peq, m


@njit(cache=True)
def _char_row(qchars, c):
    """Binary search for code point c; len(qchars) means 'not in query'."""
    lo = 0
    hi = qchars.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if qchars[mid] < c:
            lo = mid + 1
        else:
            hi = mid
    if lo < qchars.shape[0] and qchars[lo] == c:
        return lo
    return qchars.shape[0]


@njit(cache=True)
def _myers_distance(qchars, peq, m, text, vp, vn):
    """Levenshtein distance between the prepared pattern and ``text``.

    ``vp``/``vn`` are caller-provided uint64 scratch arrays of length
    ``peq.shape[1]`` (reused across calls to avoid allocation).
    """
    words = peq.shape[1]
    for w in range(words):
        vp[w] = _FULL
        vn[w] = _ZERO
    dist = m
    mask = _ONE << np.uint64((m - 1) % _WORD)
    last = words - 1
    for k in range(text.shape[0]):
        row = _char_row(qchars, text[k])
        hp_carry = _ONE
        hn_carry = _ZERO
        for w in range(words):
            eq = peq[row, w]
            pv = vp[w]
            nv = vn[w]
            x = eq | hn_carry
            d0 = (((x & pv) + pv) ^ pv) | x | nv
            hp = nv | ~(d0 | pv)
            hn = d0 & pv
            if w == last:
                if hp & mask:
                    dist += 1
                if hn & mask:
                    dist -= 1
            hp_out = (hp >> np.uint64(63)) & _ONE
            hn_out = (hn >> np.uint64(63)) & _ONE
            hp = (hp << _ONE) | hp_carry
            hn = (hn << _ONE) | hn_carry
            hp_carry = hp_out
            hn_carry = hn_out
            vp[w] = hn | ~(d0 | hp)
            vn[w] = hp & d0
    return dist


@njit(cache=True)
def _myers_distance_1w(qchars, peq1, m, text):
    """Single-word specialization (pattern <= 64 chars) with scalar registers."""
    vp = _FULL
    vn = _ZERO
    dist = m
    mask = _ONE << np.uint64(m - 1)
    for k in range(text.shape[0]):
        row = _char_row(qchars, text[k])
        eq = peq1[row]
        x = eq
        d0 = (((x & vp) + vp) ^ vp) | x | vn
        hp = vn | ~(d0 | vp)
        hn = d0 & vp
        if hp & mask:
            dist += 1
        if hn & mask:
            dist -= 1
        hp = (hp << _ONE) | _ONE
        vp = (hn << _ONE) | ~(d0 | hp)
        vn = hp & d0
    return dist


@njit(cache=True)
def _scan_best_1w(qchars, peq1, m, flat, offsets, lengths, lo, hi, seed_sim, seed_idx, max_eval):
    best_sim = seed_sim
    best_idx = seed_idx
    best_dist = -1
    evaluated = 0
    for k in range(lo, hi):
        lk = lengths[k]
        span = m if m > lk else lk
        diff = m - lk if m > lk else lk - m
        upper = 1.0 - diff / span
        if upper < best_sim:
            continue
        if upper == best_sim and best_idx >= 0 and k > best_idx:
            continue
        if max_eval > 0 and evaluated >= max_eval:
            break
        evaluated += 1
        off = offsets[k]
        d = _myers_distance_1w(qchars, peq1, m, flat[off : off + lk])
        sim = 1.0 - d / span
        if sim > best_sim or (sim == best_sim and (best_idx < 0 or k < best_idx)):
            best_sim = sim
            best_idx = k
            best_dist = d
    return best_idx, best_dist, evaluated


@njit(parallel=True, cache=True)
def _scan_best_1w_parallel(qchars, peq1, m, flat, offsets, lengths, nchunks,
                           out_idx, out_dist, out_sim):
    n = lengths.shape[0]
    for c in prange(nchunks):
        lo = c * n // nchunks
        hi = (c + 1) * n // nchunks
        idx, dist, _ = _scan_best_1w(
            qchars, peq1, m, flat, offsets, lengths, lo, hi, -1.0, -1, 0
        )
        out_idx[c] = idx
        out_dist[c] = dist
        if idx >= 0:
            lk = lengths[idx]
            span = m if m > lk else lk
            out_sim[c] = 1.0 - dist / span
        else:
            out_sim[c] = -1.0


@njit(cache=True)
def _scan_best(qchars, peq, m, flat, offsets, lengths, seed_sim, seed_idx, max_eval):
    """Find the entry with the highest similarity to the prepared pattern.

    Entries are visited in storage order (sorted by id), so the first
    occurrence of the maximum similarity is the lexicographically smallest
    id.  Entries whose length alone caps their similarity strictly below
    the running best are skipped without computing a distance.  Returns
    ``(best_idx, best_dist, evaluated)``; ``best_idx`` is -1 only for an
    empty database.
    """
    n = lengths.shape[0]
    words = peq.shape[1]
    vp = np.empty(words, dtype=np.uint64)
    vn = np.empty(words, dtype=np.uint64)
    best_sim = seed_sim
    best_idx = seed_idx
    best_dist = -1
    evaluated = 0
    for k in range(n):
        lk = lengths[k]
        hi = m if m > lk else lk
        diff = m - lk if m > lk else lk - m
        # length difference is a lower bound on the distance
        upper = 1.0 - diff / hi
        if upper < best_sim:
            continue
        if upper == best_sim and best_idx >= 0 and k > best_idx:
            continue
        if max_eval > 0 and evaluated >= max_eval:
            break
        evaluated += 1
        off = offsets[k]
        d = _myers_distance(qchars, peq, m, flat[off : off + lk], vp, vn)
        sim = 1.0 - d / hi
        if sim > best_sim or (sim == best_sim and (best_idx < 0 or k < best_idx)):
            best_sim = sim
            best_idx = k
            best_dist = d
    return best_idx, best_dist, evaluated


# --- pure-Python mirrors -----------------------------------------------------


def _myers_distance_py(qchars, peq, m, text) -> int:
    full = (1 << _WORD) - 1
    words = peq.shape[1]
    vp = [full] * words
    vn = [0] * words
    dist = m
    mask = 1 << ((m - 1) % _WORD)
    last = words - 1
    peq_int = peq  # uint64 ndarray; int() per access below
    n_rows = qchars.shape[0]
    for c in text:
        lo, hi = 0, n_rows
        while lo < hi:
            mid = (lo + hi) >> 1
            if qchars[mid] < c:
                lo = mid + 1
            else:
                hi = mid
        row = lo if lo < n_rows and qchars[lo] == c else n_rows
        hp_carry, hn_carry = 1, 0
        for w in range(words):
            eq = int(peq_int[row, w])
            pv = vp[w]
            nv = vn[w]
            x = eq | hn_carry
            d0 = ((((x & pv) + pv) & full) ^ pv) | x | nv
            hp = nv | (~(d0 | pv) & full)
            hn = d0 & pv
            if w == last:
                if hp & mask:
                    dist += 1
                if hn & mask:
                    dist -= 1
            hp_out = (hp >> 63) & 1
            hn_out = (hn >> 63) & 1
            hp = ((hp << 1) | hp_carry) & full
            hn = ((hn << 1) | hn_carry) & full
            hp_carry, hn_carry = hp_out, hn_out
            vp[w] = hn | (~(d0 | hp) & full)
            vn[w] = hp & d0
    return dist


def _scan_best_py(qchars, peq, m, flat, offsets, lengths, seed_sim, seed_idx, max_eval):
    n = lengths.shape[0]
    best_sim = seed_sim
    best_idx = seed_idx
    best_dist = -1
    evaluated = 0
    for k in range(n):
        lk = int(lengths[k])
        hi = max(m, lk)
        upper = 1.0 - abs(m - lk) / hi
        if upper < best_sim:
            continue
        if upper == best_sim and best_idx >= 0 and k > best_idx:
            continue
        if max_eval > 0 and evaluated >= max_eval:
            break
        evaluated += 1
        off = int(offsets[k])
        d = _myers_distance_py(qchars, peq, m, flat[off : off + lk])
        sim = 1.0 - d / hi
        if sim > best_sim or (sim == best_sim and (best_idx < 0 or k < best_idx)):
            best_sim = sim
            best_idx = k
            best_dist = d
    return best_idx, best_dist, evaluated


#: below this entry count the chunked parallel scan is not worth spinning up
_PARALLEL_MIN_ENTRIES = 200_000
#: fixed chunk count so results never depend on the machine's thread count
_PARALLEL_CHUNKS = 64


def scan_best(qchars, peq, m, flat, offsets, lengths, seed_sim=-1.0, seed_idx=-1, max_eval=0):
    """Dispatch the best-match scan to the fastest applicable kernel.

    Every path returns the identical (best_idx, best_dist, evaluated)
    result; the single-word and chunked-parallel variants are speedups
    only.  Ties reduce to the smallest entry index deterministically.
    """
    if not HAVE_NUMBA:
        return _scan_best_py(
            qchars, peq, m, flat, offsets, lengths, seed_sim, seed_idx, max_eval
        )
    if peq.shape[1] != 1:
        return _scan_best(
            qchars, peq, m, flat, offsets, lengths, seed_sim, seed_idx, max_eval
        )
    peq1 = np.ascontiguousarray(peq[:, 0])
    n = lengths.shape[0]
    if max_eval == 0 and seed_idx < 0 and n >= _PARALLEL_MIN_ENTRIES:
        out_idx = np.empty(_PARALLEL_CHUNKS, dtype=np.int64)
        out_dist = np.empty(_PARALLEL_CHUNKS, dtype=np.int64)
        out_sim = np.empty(_PARALLEL_CHUNKS, dtype=np.float64)
        _scan_best_1w_parallel(
            qchars, peq1, m, flat, offsets, lengths, _PARALLEL_CHUNKS,
            out_idx, out_dist, out_sim,
        )
        best_idx, best_dist, best_sim = -1, -1, -1.0
        for c in range(_PARALLEL_CHUNKS):
            idx = int(out_idx[c])
            if idx < 0:
                continue
            sim = float(out_sim[c])
            if sim > best_sim or (sim == best_sim and idx < best_idx):
                best_sim, best_idx, best_dist = sim, idx, int(out_dist[c])
        return best_idx, best_dist, n
    return _scan_best_1w(
        qchars, peq1, m, flat, offsets, lengths, 0, n, seed_sim, seed_idx, max_eval
    )


def myers_distance(query: str, text: str) -> int:
    """Bit-parallel Levenshtein distance (reference entry point for tests)."""
    if not query:
        return len(text)
    qchars, peq, m = build_pattern(query)
    codes = encode(text)
    if HAVE_NUMBA:
        words = peq.shape[1]
        vp = np.empty(words, dtype=np.uint64)
        vn = np.empty(words, dtype=np.uint64)
        return int(_myers_distance(qchars, peq, m, codes, vp, vn))
    return _myers_distance_py(qchars, peq, m, codes)
