"""Pure-Python fallbacks for the compiled kernels in ``_kernels.pyx``.

Both implementations follow the same schedule, so round and update counts
agree exactly between backends.
"""
from __future__ import annotations

import numpy as np


def transitive_closure(m: np.ndarray) -> np.ndarray:
    """Close a square uint8 adjacency matrix in place (Warshall)."""
    n = m.shape[0]
    for k in range(n):
        col = m[:, k].astype(bool)
        if not col.any():
            continue
        row = m[k, :]
        m[col, :] |= row
    return m


def close_relations(rel: np.ndarray, max_rounds: int, max_updates: int):
    """Path-consistency closure of a pairwise relation tensor.

    ``rel[i, j]`` is a K x K 0/1 matrix of admissible value pairs for
    variables i and j; ``rel[i, i]`` is diagonal and holds the admissible
    values of i.  Every pair (i, j) with i <= j is tightened by
    ``rel[i, j] &= rel[i, k] o rel[k, j]`` for all k until nothing changes.

    Returns ``(rounds, updates, status)`` where status is 0 on success,
    1 when ``max_rounds`` and 2 when ``max_updates`` was exceeded.
    """
    n = rel.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    # singletons first, then pairs, matching the cluster order of the caller
    pairs.sort(key=lambda p: (p[0] != p[1], p))
    index = {p: t for t, p in enumerate(pairs)}
    touching = [[index[(min(a, b), max(a, b))] for b in range(n)] for a in range(n)]
    cur = [True] * len(pairs)
    rounds = 0
    updates = 0
    while any(cur):
        rounds += 1
        if rounds > max_rounds:
            return rounds - 1, updates, 1
        nxt = [False] * len(pairs)
        for t, (i, j) in enumerate(pairs):
            if not cur[t]:
                continue
            for k in range(n):
                if k == i and k == j:
                    continue
                comp = (rel[i, k].astype(np.int32) @ rel[k, j]) > 0
                old = rel[i, j]
                new = old & comp
                if np.array_equal(new, old):
                    continue
                updates += 1
                if updates > max_updates:
                    return rounds, updates - 1, 2
                if not new.any():
                    for a in range(n):
                        for b in range(a, n):
                            if (a, b) != (i, j) and rel[a, b].any():
                                updates += 1
                    rel[...] = 0
                    if updates > max_updates:
                        return rounds, max_updates, 2
                    return rounds, updates, 0
                rel[i, j] = new
                rel[j, i] = new.T
                for s in touching[i]:
                    nxt[s] = True
                for s in touching[j]:
                    nxt[s] = True
        cur = nxt
    return rounds, updates, 0
