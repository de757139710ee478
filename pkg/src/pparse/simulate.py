"""Simulated partial annotations and annotation cost models.

Partial annotations are derived from gold trees by stochastic top-down arc
removal: each dependent's deletion weight grows with its depth, so structure
low in the tree disappears first.  For a fixed seed each sentence draws one
removal order, and every removal fraction deletes a prefix of that order, so
degradation levels are nested and the resulting curves are monotone by
construction.
"""

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .constraints import ArcIndex, build_gfl_vector, compile_ug_vector
from .features import build_design_matrix
from .optimizer import frank_wolfe_train, parse_corpus


@dataclass(frozen=True)
class DegradationConfig:
    removal_fraction: float
    depth_bias: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.removal_fraction <= 1.0:
            raise ValueError("removal_fraction must be in [0, 1]")
        if self.depth_bias < 0:
            raise ValueError("depth_bias must be nonnegative")


@dataclass(frozen=True)
class CostModel:
    kind: str = "equal"  # or "variable"
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("equal", "variable"):
            raise ValueError(f"unknown cost model {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def arc_depths(heads):
    """Depth of each dependent: children of the root have depth 1."""
    m = len(heads)
    depths = [0] * m
    for dep in range(1, m + 1):
        depth = 0
        node = dep
        while node != 0:
            node = int(heads[node - 1])
            depth += 1
            if depth > m:
                raise ValueError("head array contains a cycle")
        depths[dep - 1] = depth
    return depths


def _sentence_rng(seed, sentence_id):
    digest = hashlib.blake2b(f"{seed}|{sentence_id}".encode(), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def removal_order(heads, depth_bias, rng):
    """Dependents in removal order via a weighted exponential race."""
    depths = np.array(arc_depths(heads), dtype=np.float64)
    weights = depths**depth_bias
    keys = rng.exponential(size=len(heads)) / weights
    return [int(d) + 1 for d in np.argsort(keys, kind="stable")]


def degrade_tree(gold, cfg, idx, sentence):
    """Whitelist the surviving arcs of one gold tree as a ConstraintSet.

    Removes ceil(removal_fraction * m) arcs without replacement, deletion
    probability proportional to depth**depth_bias; surviving arcs pin their
    dependent's head (with single-head blacklist propagation), deleted arcs
    contribute nothing.
    """
    from .constraints import _SentenceConstraints

    m = len(gold)
    ordinal = idx.ordinal_of(sentence.id)
    order = removal_order(gold, cfg.depth_bias, _sentence_rng(cfg.seed, sentence.id))
    # the epsilon keeps float overshoot (0.4 * 35 = 14.000000000000002) from
    # bumping the ceiling to an extra removal
    n_remove = math.ceil(cfg.removal_fraction * m - 1e-9)
    removed = set(order[:n_remove])
    sc = _SentenceConstraints(idx, ordinal, m)
    for dep in range(1, m + 1):
        if dep not in removed:
            sc.whitelist_arc_with_propagation(int(gold[dep - 1]), dep, f"surviving gold arc for {dep}")
    return sc.finish()


def degrade_corpus(corpus, idx, cfg):
    """Per-sentence constraint sets from degraded gold trees."""
    sets = []
    for sentence in corpus.sentences:
        gold = sentence.gold_heads()
        if gold is None:
            raise ValueError(f"sentence {sentence.id} has no gold heads to degrade")
        sets.append(degrade_tree(gold, cfg, idx, sentence))
    return sets


def arc_cost(j, m, model):
    """Cost of the j-th annotated arc (1-based) in an m-word sentence."""
    if model.kind == "equal":
        return 1.0
    return 1.0 + model.beta * (j - 1) / max(m - 1, 1)


def sentence_cost(k, m, model):
    """Cost of annotating k arcs of an m-word sentence."""
    if model.kind == "equal":
        return float(k)
    return k + model.beta * (k * (k - 1) / 2.0) / max(m - 1, 1)


def corpus_cost(partials, model):
    """Total cost of per-sentence (whitelist size, sentence length) pairs."""
    total = 0.0
    for k, m in partials:
        if k > m:
            raise ValueError(f"whitelist size {k} exceeds sentence length {m}")
        total += sentence_cost(k, m, model)
    return total


def _whitelist_sizes(sets, corpus):
    return [(len(cs.whitelist), len(s)) for cs, s in zip(sets, corpus.sentences)]


def cost_curve(
    train_corpus,
    eval_corpus,
    completion_levels,
    budgets,
    deg_cfg,
    train_cfg,
    cost_model,
    rules=None,
):
    """UAS as a function of annotation budget and completion level.

    For each completion level the gold trees are degraded to that level; for
    each budget, sentences are annotated greedily in corpus order until the
    budget is exhausted, a model is trained with both rule and annotation
    rewards, and UAS is measured on the held-out split.  Rows are
    (completion, budget, cost used, sentences annotated, uas); a budget too
    small for even one sentence yields a row with zero annotated sentences.
    """
    from .evaluate import uas

    idx = ArcIndex(train_corpus)
    X, vocab = build_design_matrix(train_corpus, idx)
    u = compile_ug_vector(train_corpus, idx, rules)
    eval_idx = ArcIndex(eval_corpus)
    eval_X, _ = build_design_matrix(eval_corpus, eval_idx, vocab)

    rows = []
    for level in completion_levels:
        cfg = replace(deg_cfg, removal_fraction=1.0 - level)
        sets = degrade_corpus(train_corpus, idx, cfg)
        costs = [sentence_cost(k, m, cost_model) for k, m in _whitelist_sizes(sets, train_corpus)]
        for budget in budgets:
            chosen = set()
            spent = 0.0
            for i, cost in enumerate(costs):
                if spent + cost <= budget and len(sets[i].whitelist) > 0:
                    chosen.add(i)
                    spent += cost
            active = [sets[i] if i in chosen else None for i in range(len(sets))]
            v = build_gfl_vector(active, idx.n_arcs)
            model = frank_wolfe_train(train_corpus, X, idx, u, v, train_cfg, vocab=vocab)
            preds = parse_corpus(model, eval_corpus, rules=rules)
            score = uas(preds, eval_corpus)
            rows.append((level, float(budget), spent, len(chosen), score))
    return rows


def cost_curve_tsv(rows):
    out = ["completion\tbudget\tcost\tn_annotated\tuas"]
    for level, budget, spent, chosen, score in rows:
        out.append(f"{level!r}\t{budget!r}\t{spent!r}\t{chosen}\t{score:.6f}")
    return "\n".join(out) + "\n"
