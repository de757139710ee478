"""Pure-Python maximum spanning arborescence kernel.

Fallback twin of the compiled extension in _cle.pyx: same contraction
algorithm, same tie-breaking (lowest head index wins at equal score), so the
two backends return identical trees on identical inputs.

Kernel contract: scores is an (n, n) float64 matrix, scores[h, d] is the score
of attaching dependent d under head h, node 0 is the root.  The diagonal and
all banned arcs must already be set to a value <= BAN_THRESHOLD; column 0 is
never read.  Every column d >= 1 must contain at least one unbanned entry.
"""

import numpy as np

BACKEND = "python"

BAN = -1e30
BAN_THRESHOLD = -1e29


def _find_cycle(heads, n):
    """First cycle reachable scanning dependents in ascending order, or None."""
    color = np.zeros(n, dtype=np.int8)
    color[0] = 2
    for start in range(1, n):
        if color[start]:
            continue
        path = []
        v = start
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = heads[v]
        if color[v] == 1:
            cycle = path[path.index(v):]
            for p in path:
                color[p] = 2
            return cycle
        for p in path:
            color[p] = 2
    return None


def cle_heads(scores):
    """Best head per dependent; heads[0] is unused and set to 0."""
    n = scores.shape[0]
    heads = np.zeros(n, dtype=np.int64)
    if n > 1:
        heads[1:] = np.argmax(scores[:, 1:], axis=0)
    cycle = _find_cycle(heads, n)
    if cycle is None:
        return heads

    cycle = sorted(cycle)
    in_cycle = np.zeros(n, dtype=bool)
    in_cycle[cycle] = True
    keep = [0] + [v for v in range(1, n) if not in_cycle[v]]
    k = len(keep)
    c = k  # contracted supernode id in the reduced problem

    sub = np.full((k + 1, k + 1), BAN)
    for a in range(k):
        for b in range(1, k):
            if a != b:
                sub[a, b] = scores[keep[a], keep[b]]

    # arcs leaving the cycle: best in-cycle head for each outside dependent
    src_out = np.zeros(k, dtype=np.int64)
    for b in range(1, k):
        best = BAN
        best_u = cycle[0]
        for u in cycle:
            val = scores[u, keep[b]]
            if val > best:
                best = val
                best_u = u
        sub[c, b] = best
        src_out[b] = best_u

    # arcs entering the cycle: offset by the cycle arc they would displace
    entry = np.zeros(k, dtype=np.int64)
    for a in range(k):
        best = BAN
        best_d = cycle[0]
        for d in cycle:
            val = scores[keep[a], d] - scores[heads[d], d]
            if val > best:
                best = val
                best_d = d
        sub[a, c] = best
        entry[a] = best_d

    sub_heads = cle_heads(sub)

    result = heads.copy()
    hc = sub_heads[c]
    result[entry[hc]] = keep[hc]
    for b in range(1, k):
        hb = sub_heads[b]
        result[keep[b]] = src_out[b] if hb == c else keep[hb]
    return result
