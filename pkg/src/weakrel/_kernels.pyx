# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: relation-tensor closure and Warshall closure.

Semantics and schedule mirror ``_kernels_py`` exactly.
"""
import numpy as np
cimport numpy as cnp


def transitive_closure(cnp.uint8_t[:, ::1] m):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k
    cdef cnp.uint8_t *row_i
    cdef cnp.uint8_t *row_k
    with nogil:
        for k in range(n):
            row_k = &m[k, 0]
            for i in range(n):
                if m[i, k]:
                    row_i = &m[i, 0]
                    # branch-free row union, vectorizable
                    for j in range(n):
                        row_i[j] |= row_k[j]
    return np.asarray(m)


cdef inline bint _tighten(cnp.uint8_t[:, :, :, ::1] rel, Py_ssize_t i,
                          Py_ssize_t j, Py_ssize_t k, Py_ssize_t K,
                          cnp.uint8_t[:, ::1] buf) nogil:
    cdef Py_ssize_t a, b, c
    cdef bint changed = 0
    cdef cnp.uint8_t v
    for a in range(K):
        for b in range(K):
            if not rel[i, j, a, b]:
                buf[a, b] = 0
                continue
            v = 0
            for c in range(K):
                if rel[i, k, a, c] and rel[k, j, c, b]:
                    v = 1
                    break
            buf[a, b] = v
            if not v:
                changed = 1
    return changed


def close_relations(cnp.uint8_t[:, :, :, ::1] rel, long max_rounds, long max_updates):
    cdef Py_ssize_t n = rel.shape[0]
    cdef Py_ssize_t K = rel.shape[2]
    cdef Py_ssize_t i, j, k, a, b, t, s, npairs
    cdef long rounds = 0, updates = 0
    cdef bint any_cur, nonempty
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    pairs.sort(key=lambda p: (p[0] != p[1], p))
    npairs = len(pairs)
    cdef cnp.intp_t[::1] pi = np.array([p[0] for p in pairs], dtype=np.intp)
    cdef cnp.intp_t[::1] pj = np.array([p[1] for p in pairs], dtype=np.intp)
    index = {p: t for t, p in enumerate(pairs)}
    cdef cnp.intp_t[:, ::1] touching = np.array(
        [[index[(min(a, b), max(a, b))] for b in range(n)] for a in range(n)],
        dtype=np.intp).reshape(n, n)
    cdef cnp.uint8_t[::1] cur = np.ones(npairs, dtype=np.uint8)
    cdef cnp.uint8_t[::1] nxt = np.zeros(npairs, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] buf = np.zeros((K, K), dtype=np.uint8)
    while True:
        any_cur = 0
        for t in range(npairs):
            if cur[t]:
                any_cur = 1
                break
        if not any_cur:
            break
        rounds += 1
        if rounds > max_rounds:
            return rounds - 1, updates, 1
        nxt[:] = 0
        for t in range(npairs):
            if not cur[t]:
                continue
            i = pi[t]
            j = pj[t]
            for k in range(n):
                if k == i and k == j:
                    continue
                if not _tighten(rel, i, j, k, K, buf):
                    continue
                updates += 1
                if updates > max_updates:
                    return rounds, updates - 1, 2
                nonempty = 0
                for a in range(K):
                    for b in range(K):
                        if buf[a, b]:
                            nonempty = 1
                            break
                    if nonempty:
                        break
                if not nonempty:
                    for s in range(npairs):
                        if s == t:
                            continue
                        for a in range(K):
                            for b in range(K):
                                if rel[pi[s], pj[s], a, b]:
                                    nonempty = 1
                                    break
                            if nonempty:
                                break
                        if nonempty:
                            updates += 1
                            nonempty = 0
                    rel[...] = 0
                    if updates > max_updates:
                        return rounds, max_updates, 2
                    return rounds, updates, 0
                for a in range(K):
                    for b in range(K):
                        rel[i, j, a, b] = buf[a, b]
                        rel[j, i, b, a] = buf[a, b]
                for s in range(n):
                    nxt[touching[i, s]] = 1
                    nxt[touching[j, s]] = 1
        cur[:] = nxt
    return rounds, updates, 0
