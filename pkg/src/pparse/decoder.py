"""Per-sentence tree decoding over arc score matrices.

best_tree solves the maximum-score arborescence problem (Chu-Liu-Edmonds with
cycle contraction), non-projective, rooted at node 0.  The hot kernel is the
compiled extension pparse._cle when it was built; otherwise the structurally
identical pure-Python twin is used.  Set PPARSE_PURE_PYTHON=1 to force the
fallback.  Both backends break score ties toward the lower head index, so
results are reproducible and backend-independent.
"""

import itertools
import os

import numpy as np

from ._cle_py import BAN, BAN_THRESHOLD
from ._cle_py import cle_heads as _cle_heads_py

if os.environ.get("PPARSE_PURE_PYTHON"):
    _cle_heads = _cle_heads_py
    BACKEND = "python"
else:
    try:
        from ._cle import cle_heads as _cle_heads

        BACKEND = "cython"
    except ImportError:
        _cle_heads = _cle_heads_py
        BACKEND = "python"


class InfeasibleError(Exception):
    """No arborescence exists under the given score bans."""


def _prepare(scores):
    work = np.array(scores, dtype=np.float64, order="C", copy=True)
    n = work.shape[0]
    if work.shape != (n, n) or n < 2:
        raise ValueError(f"expected a square (m+1) x (m+1) score matrix with m >= 1, got {work.shape}")
    body = work[:, 1:]
    if np.isnan(body).any() or np.isposinf(body).any():
        raise ValueError("scores must be finite (only -inf sentinels are allowed)")
    neg = np.isneginf(body)
    if ((body <= BAN_THRESHOLD) & ~neg).any():
        raise ValueError(f"finite scores at or below {BAN_THRESHOLD} are reserved for banned arcs")
    body[neg] = BAN
    work[:, 0] = BAN
    np.fill_diagonal(work, BAN)
    return work, n


def _check_columns(work, n):
    """Index of the first dependent with no feasible head, or 0 if all fine."""
    col_max = work[:, 1:].max(axis=0)
    bad = np.nonzero(col_max <= BAN_THRESHOLD)[0]
    return int(bad[0]) + 1 if bad.size else 0


def _solve_checked(work, n):
    heads = _cle_heads(work)
    for d in range(1, n):
        if work[heads[d], d] <= BAN_THRESHOLD:
            return None, 0.0
    total = float(sum(work[heads[d], d] for d in range(1, n)))
    return heads, total


def best_tree(scores, single_root=True):
    """Maximum-score arborescence; returns head per dependent (length m).

    With single_root, exactly one token attaches to the root: each feasible
    root child is forced in turn and the best-scoring solution wins, lower
    root-child index breaking ties.
    """
    work, n = _prepare(scores)
    bad = _check_columns(work, n)
    if bad:
        raise InfeasibleError(f"dependent {bad} has no feasible head")

    heads, _ = _solve_checked(work, n)
    if heads is None:
        raise InfeasibleError("every arborescence uses a banned arc")
    if not single_root or int(np.sum(heads[1:] == 0)) == 1:
        return heads[1:].copy()

    best_heads = None
    best_total = -np.inf
    for child in range(1, n):
        if work[0, child] <= BAN_THRESHOLD:
            continue
        forced = work.copy()
        forced[0, 1:] = BAN
        forced[0, child] = work[0, child]
        if _check_columns(forced, n):
            continue
        cand, total = _solve_checked(forced, n)
        if cand is not None and total > best_total:
            best_heads = cand
            best_total = total
    if best_heads is None:
        raise InfeasibleError("no single-root arborescence avoids banned arcs")
    return best_heads[1:].copy()


def tree_score(scores, heads):
    """Total score of a head assignment under an arc score matrix."""
    return float(sum(scores[int(h), d + 1] for d, h in enumerate(heads)))


def _is_arborescence(assignment, m, single_root):
    roots = sum(1 for h in assignment if h == 0)
    if single_root and roots != 1:
        return False
    if roots == 0:
        return False
    for start in range(1, m + 1):
        node = start
        steps = 0
        while node != 0:
            node = assignment[node - 1]
            steps += 1
            if steps > m:
                return False
    return True


def brute_force_best_tree(scores, single_root=True):
    """Exhaustive oracle for small sentences (m <= 8).

    Ties break toward the lexicographically smallest head array.
    """
    scores = np.asarray(scores, dtype=np.float64)
    m = scores.shape[0] - 1
    if m > 8:
        raise ValueError(f"brute force refuses m={m} > 8")
    candidates = []
    for d in range(1, m + 1):
        heads = [h for h in range(m + 1) if h != d and scores[h, d] > BAN_THRESHOLD]
        if not heads:
            raise InfeasibleError(f"dependent {d} has no feasible head")
        candidates.append(heads)
    best = None
    best_total = -np.inf
    for assignment in itertools.product(*candidates):
        total = sum(scores[h, d + 1] for d, h in enumerate(assignment))
        # validity is the expensive part; lexicographic iteration order keeps
        # the first maximum, hence the smallest head array, under this prune
        if total <= best_total:
            continue
        if not _is_arborescence(assignment, m, single_root):
            continue
        best = assignment
        best_total = total
    if best is None:
        raise InfeasibleError("no feasible arborescence")
    return np.array(best, dtype=np.int64)


def right_branching(sentence):
    """Baseline: first token under the root, every other under its left neighbor."""
    m = len(sentence)
    return np.arange(m, dtype=np.int64)
