# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled maximum spanning arborescence kernel.

Mirrors pparse._cle_py exactly: same contraction algorithm and the same
lowest-head-index tie-breaking, so both backends return identical trees.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

cdef double BAN = -1e30


cdef int _find_cycle(cnp.int64_t[::1] heads, cnp.int8_t[::1] color,
                     cnp.int64_t[::1] path, cnp.int64_t[::1] cycle_out) noexcept:
    """Writes the first cycle (ascending dependent scan) into cycle_out; returns its length."""
    cdef int n = heads.shape[0]
    cdef int start, v, plen, i, j, clen
    color[0] = 2
    for i in range(1, n):
        color[i] = 0
    for start in range(1, n):
        if color[start] != 0:
            continue
        plen = 0
        v = start
        while color[v] == 0:
            color[v] = 1
            path[plen] = v
            plen += 1
            v = heads[v]
        if color[v] == 1:
            j = 0
            while path[j] != v:
                j += 1
            clen = plen - j
            for i in range(clen):
                cycle_out[i] = path[j + i]
            for i in range(plen):
                color[path[i]] = 2
            return clen
        for i in range(plen):
            color[path[i]] = 2
    return 0


def cle_heads(cnp.float64_t[:, ::1] scores):
    """Best head per dependent; heads[0] is unused and set to 0.

    Same contract as the pure-Python kernel: diagonal and banned arcs already
    hold values <= BAN_THRESHOLD, column 0 is never read.
    """
    cdef int n = scores.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] heads_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] heads = heads_arr
    cdef int d, h, a, b, k, c, u, clen, i
    cdef double best, val

    for d in range(1, n):
        best = scores[0, d]
        heads[d] = 0
        for h in range(1, n):
            if scores[h, d] > best:
                best = scores[h, d]
                heads[d] = h

    cdef cnp.int8_t[::1] color = np.zeros(n, dtype=np.int8)
    cdef cnp.int64_t[::1] path = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] cycle = np.zeros(n, dtype=np.int64)
    clen = _find_cycle(heads, color, path, cycle)
    if clen == 0:
        return heads_arr

    cdef cnp.ndarray[cnp.int64_t, ndim=1] cyc_arr = np.sort(np.asarray(cycle[:clen]))
    cdef cnp.int64_t[::1] cyc = cyc_arr
    cdef cnp.int8_t[::1] in_cycle = np.zeros(n, dtype=np.int8)
    for i in range(clen):
        in_cycle[cyc[i]] = 1

    cdef cnp.int64_t[::1] keep = np.zeros(n, dtype=np.int64)
    k = 1
    keep[0] = 0
    for d in range(1, n):
        if not in_cycle[d]:
            keep[k] = d
            k += 1
    c = k  # contracted supernode id

    cdef cnp.ndarray[cnp.float64_t, ndim=2] sub_arr = np.full((k + 1, k + 1), BAN)
    cdef cnp.float64_t[:, ::1] sub = sub_arr
    for a in range(k):
        for b in range(1, k):
            if a != b:
                sub[a, b] = scores[keep[a], keep[b]]

    # arcs leaving the cycle: best in-cycle head for each outside dependent
    cdef cnp.int64_t[::1] src_out = np.zeros(k, dtype=np.int64)
    for b in range(1, k):
        best = BAN
        src_out[b] = cyc[0]
        for i in range(clen):
            u = cyc[i]
            val = scores[u, keep[b]]
            if val > best:
                best = val
                src_out[b] = u
        sub[c, b] = best

    # arcs entering the cycle: offset by the cycle arc they would displace
    cdef cnp.int64_t[::1] entry = np.zeros(k, dtype=np.int64)
    for a in range(k):
        best = BAN
        entry[a] = cyc[0]
        for i in range(clen):
            d = cyc[i]
            val = scores[keep[a], d] - scores[heads[d], d]
            if val > best:
                best = val
                entry[a] = d
        sub[a, c] = best

    cdef cnp.int64_t[::1] sub_heads = cle_heads(sub_arr)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] result_arr = heads_arr.copy()
    cdef cnp.int64_t[::1] result = result_arr
    cdef int hc = sub_heads[c]
    result[entry[hc]] = keep[hc]
    cdef int hb
    for b in range(1, k):
        hb = sub_heads[b]
        if hb == c:
            result[keep[b]] = src_out[b]
        else:
            result[keep[b]] = keep[hb]
    return result_arr
