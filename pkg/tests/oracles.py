"""Independent reference implementations used to check the library.

Nothing here shares code with the package: the brute-force recursion and
the vectorized dynamic program below are the trusted side of every
dual-route check, so they must stay independent of the bit-parallel scan
kernel and the package's own DP.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def brute_levenshtein(a: str, b: str) -> int:
    """Naive memoized recursion straight from the distance definition.

    Only suitable for short strings; used to anchor the faster oracles.
    """

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        sub = go(i - 1, j - 1) + (a[i - 1] != b[j - 1])
        ins = go(i, j - 1) + 1
        dele = go(i - 1, j) + 1
        return min(sub, ins, dele)

    return go(len(a), len(b))


def batch_levenshtein(query: str, texts: list[str]) -> np.ndarray:
    """Exhaustive DP distances from ``query`` to every string in ``texts``.

    Runs the textbook row recurrence simultaneously over all texts (padded
    to a matrix); the in-row dependency D[i][j] = min(..., D[i][j-1] + 1)
    is resolved with the prefix-minimum identity
    D[i][j] = j + min_{k<=j}(A[k] - k), A = candidate values before the
    left-neighbor term.
    """
    n = len(texts)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    lengths = np.array([len(t) for t in texts], dtype=np.int64)
    width = int(lengths.max(initial=0))
    if width == 0:
        return np.full(n, len(query), dtype=np.int64)
    grid = np.zeros((n, width), dtype=np.uint32)
    for i, t in enumerate(texts):
        if t:
            grid[i, : len(t)] = np.frombuffer(t.encode("utf-32-le"), dtype=np.uint32)
    qcodes = (
        np.frombuffer(query.encode("utf-32-le"), dtype=np.uint32)
        if query
        else np.zeros(0, dtype=np.uint32)
    )

    cols = np.arange(width + 1, dtype=np.int64)
    prev = np.tile(cols, (n, 1))
    for i, qc in enumerate(qcodes, start=1):
        cost = (grid != qc).astype(np.int64)
        cand = np.minimum(prev[:, :-1] + cost, prev[:, 1:] + 1)
        stacked = np.concatenate(
            (np.full((n, 1), i, dtype=np.int64), cand), axis=1
        )
        prev = np.minimum.accumulate(stacked - cols, axis=1) + cols
    return prev[np.arange(n), lengths]


def exhaustive_best(query_norm: str, norms: list[str], ids: list[str]) -> tuple[float, str]:
    """Best (similarity, id) over all entries by exhaustive scan.

    Ties on similarity go to the lexicographically smallest id.  ``norms``
    must be pre-normalized titles and ``ids`` their entry ids.
    """
    if not query_norm:
        sims = np.array([1.0 if not t else 0.0 for t in norms])
    else:
        dists = batch_levenshtein(query_norm, norms)
        lengths = np.array([len(t) for t in norms], dtype=np.int64)
        denom = np.maximum(lengths, len(query_norm))
        sims = 1.0 - dists / denom
    order = sorted(range(len(norms)), key=lambda k: ids[k])
    by_id = np.array([sims[k] for k in order])
    best_k = order[int(np.argmax(by_id))]  # first max in id order = smallest id
    return float(sims[best_k]), ids[best_k]
