"""Alternating ridge / Frank-Wolfe training and constraint-aware parsing.

Training minimizes, over the convex hull of per-sentence trees and the weight
vector jointly,

    (1/2n) ||y - Xw||^2 + (lam/2) ||w||^2 - mu u.y - xi v.y

by alternating an exact ridge solve for w with a conditional-gradient step for
y: the linear subproblem decomposes into one maximum-arborescence decode per
sentence on the negated gradient, and the step either follows the classical
2/(t+2) schedule or an exact line search (the objective is quadratic in y).
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import decoder
from .constraints import default_rules
from .features import FeatureVocabulary, arc_score_rows, extract_arc_features

MODEL_MAGIC = "PPARSE1"


class RidgeError(Exception):
    """Conjugate gradient failed to reach the requested residual."""


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1.0
    mu: float = 0.1
    xi: float = 0.2
    max_iters: int = 200
    gap_tol: float = 1e-4
    step_rule: str = "harmonic"  # or "line_search"
    seed: int = 0
    single_root: bool = True

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.mu < 0 or self.xi < 0:
            raise ValueError("mu and xi must be nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")
        if self.step_rule not in ("harmonic", "line_search"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


@dataclass
class Model:
    w: np.ndarray
    vocab: FeatureVocabulary
    config: TrainConfig
    log: list = field(default_factory=list)  # rows (iteration, objective, gap, step)


def solve_ridge(X, y, lam, n, w0=None, tol=1e-8, max_iters=None):
    """argmin (1/2n)||y - Xw||^2 + (lam/2)||w||^2 via conjugate gradient.

    Solves (X'X/n + lam I) w = X'y/n to relative residual <= tol without
    forming the normal matrix.
    """
    k = X.shape[1]
    b = X.T @ y / n
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(k)
    if max_iters is None:
        max_iters = max(4 * k, 200)

    def apply(p):
        return X.T @ (X @ p) / n + lam * p

    w = np.zeros(k) if w0 is None else np.array(w0, dtype=np.float64, copy=True)
    r = b - apply(w)
    p = r.copy()
    rs = float(r @ r)
    target = tol * b_norm
    if np.sqrt(rs) <= target:
        return w
    for _ in range(max_iters):
        ap = apply(p)
        alpha = rs / float(p @ ap)
        w += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= target:
            return w
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise RidgeError(
        f"conjugate gradient did not converge in {max_iters} iterations: "
        f"relative residual {np.sqrt(rs) / b_norm:.3e} > {tol:.1e}"
    )


def compute_gradient(y, X, w, u, v, mu, xi, n):
    """Gradient of the training objective with respect to y."""
    g = (y - X @ w) / n
    if mu != 0.0:
        g = g - mu * u
    if xi != 0.0 and v is not None:
        g = g - xi * v
    return g


def objective(y, X, w, u, v, config):
    """Training objective value at (y, w)."""
    n = X.shape[0]
    resid = y - X @ w
    value = 0.5 / n * float(resid @ resid) + 0.5 * config.lam * float(w @ w)
    if config.mu != 0.0:
        value -= config.mu * float(u @ y)
    if config.xi != 0.0 and v is not None:
        value -= config.xi * float(v @ y)
    return value


def right_branching_assignment(corpus, idx):
    """Indicator vector of the right-branching tree of every sentence."""
    y = np.zeros(idx.n_arcs)
    for i, sentence in enumerate(corpus.sentences):
        for dep in range(1, len(sentence) + 1):
            y[idx.encode(i, dep, dep - 1)] = 1.0
    return y


def _block_to_matrix(block, m):
    """Unflatten one sentence's scores into the (m+1) x (m+1) arc matrix."""
    mat = np.zeros((m + 1, m + 1))
    for dep in range(1, m + 1):
        row = block[dep - 1]
        mat[:dep, dep] = row[:dep]
        mat[dep + 1 :, dep] = row[dep:]
    return mat


def _decode_vertex(corpus, idx, scores_flat, single_root):
    """Per-sentence best trees on flat scores; returns (vertex vector, head arrays)."""
    s = np.zeros(idx.n_arcs)
    all_heads = []
    deps_cache = {}
    for i, sentence in enumerate(corpus.sentences):
        m = len(sentence)
        block = scores_flat[idx.sentence_slice(i)].reshape(m, m)
        heads = decoder.best_tree(_block_to_matrix(block, m), single_root=single_root)
        all_heads.append(heads)
        deps = deps_cache.get(m)
        if deps is None:
            deps = deps_cache[m] = np.arange(1, m + 1)
        slots = np.where(heads < deps, heads, heads - 1)
        s[idx.offsets[i] + (deps - 1) * m + slots] = 1.0
    return s, all_heads


def frank_wolfe_train(corpus, X, idx, u, v, config, vocab=None, callback=None):
    """Alternating optimization: ridge solve for w, conditional-gradient step for y.

    Starts from the right-branching vertex, stops on the duality gap or the
    iteration cap, and returns the Model fitted to the final assignment.  The
    log records (iteration, objective, gap, step size) per iteration.
    """
    n = idx.n_arcs
    if X.shape[0] != n:
        raise ValueError(f"design matrix has {X.shape[0]} rows for {n} arcs")
    y = right_branching_assignment(corpus, idx)
    log = []
    w = None
    for t in range(config.max_iters):
        w = solve_ridge(X, y, config.lam, n, w0=w)
        g = compute_gradient(y, X, w, u, v, config.mu, config.xi, n)
        s, _ = _decode_vertex(corpus, idx, -g, config.single_root)
        direction = s - y
        gap = float(g @ (y - s))
        obj = objective(y, X, w, u, v, config)
        if config.step_rule == "harmonic":
            gamma = 2.0 / (t + 2.0)
        else:
            dd = float(direction @ direction)
            gamma = min(1.0, max(0.0, n * gap / dd)) if dd > 0.0 else 0.0
        log.append((t, obj, gap, gamma))
        if callback is not None:
            callback(iteration=t, y=y, w=w, gradient=g, vertex=s, gap=gap)
        if gap <= config.gap_tol:
            break
        y = gamma * s + (1.0 - gamma) * y
    w = solve_ridge(X, y, config.lam, n, w0=w)
    return Model(w=w, vocab=vocab, config=config, log=log)


def _constraint_maps(constraints, idx, ordinal):
    """Local (dep -> head) whitelist map and (head, dep) blacklist set."""
    white = {}
    black = set()
    if constraints is not None:
        for coord in constraints.whitelist:
            i, dep, head = idx.decode(coord)
            if i == ordinal:
                white[dep] = head
        for coord in constraints.blacklist:
            i, dep, head = idx.decode(coord)
            if i == ordinal:
                black.add((head, dep))
    return white, black


def parse_sentence(model, sentence, constraints=None, idx=None, rules=None, hard=False):
    """Decode one sentence under the model plus rule and annotation rewards.

    Scores are w.x + mu * [rule-conforming] + xi * (+1 whitelisted / -1
    blacklisted).  In hard mode blacklisted arcs are banned outright and a
    whitelisted dependent is pinned to its head, which can make decoding
    infeasible; soft mode cannot fail.  Constraint coordinates are interpreted
    through idx (an ArcIndex over the corpus being parsed).
    """
    if constraints is not None and idx is None:
        raise ValueError("constraints require the ArcIndex they were compiled against")
    rules = rules or default_rules()
    cfg = model.config
    m = len(sentence)
    scores = arc_score_rows(sentence, model.vocab, model.w)
    if cfg.mu != 0.0:
        for dep in range(1, m + 1):
            for head in range(0, m + 1):
                if head != dep and rules.conforms(sentence, dep, head):
                    scores[head, dep] += cfg.mu
    white, black = ({}, set())
    if constraints is not None:
        white, black = _constraint_maps(constraints, idx, idx.ordinal_of(sentence.id))
        if cfg.xi != 0.0:
            for dep, head in white.items():
                scores[head, dep] += cfg.xi
            for head, dep in black:
                scores[head, dep] -= cfg.xi
    if hard:
        for head, dep in black:
            scores[head, dep] = -np.inf
        for dep, head in white.items():
            for other in range(0, m + 1):
                if other != head and other != dep:
                    scores[other, dep] = -np.inf
    return decoder.best_tree(scores, single_root=cfg.single_root)


def parse_corpus(model, corpus, constraint_sets=None, idx=None, rules=None, hard=False):
    """Parse every sentence; constraint_sets is a per-sentence list or None."""
    out = []
    for i, sentence in enumerate(corpus.sentences):
        cs = constraint_sets[i] if constraint_sets is not None else None
        out.append(parse_sentence(model, sentence, constraints=cs, idx=idx, rules=rules, hard=hard))
    return out


def save_model(model, path):
    """Write the versioned model file: magic, config JSON, weight TSV."""
    lines = [MODEL_MAGIC]
    cfg = {
        "lam": model.config.lam,
        "mu": model.config.mu,
        "xi": model.config.xi,
        "max_iters": model.config.max_iters,
        "gap_tol": model.config.gap_tol,
        "step_rule": model.config.step_rule,
        "seed": model.config.seed,
        "single_root": model.config.single_root,
    }
    lines.append(json.dumps(cfg, sort_keys=True))
    lines.append(str(len(model.vocab)))
    for col, name in enumerate(model.vocab.names):
        lines.append(f"{name}\t{float(model.w[col])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a {MODEL_MAGIC} model file")
    cfg = TrainConfig(**json.loads(lines[1]))
    count = int(lines[2])
    names = []
    weights = np.zeros(count)
    for row, line in enumerate(lines[3 : 3 + count]):
        name, value = line.split("\t")
        names.append(name)
        weights[row] = float(value)
    if len(names) != count:
        raise ValueError(f"{path}: expected {count} weight rows, found {len(names)}")
    return Model(w=weights, vocab=FeatureVocabulary(names), config=cfg, log=[])


def training_log_tsv(model):
    """Training log as TSV with header: iteration, objective, gap, step size."""
    rows = ["iteration\tobjective\tgap\tstep"]
    for t, obj, gap, step in model.log:
        rows.append(f"{t}\t{obj!r}\t{gap!r}\t{step!r}")
    return "\n".join(rows) + "\n"
