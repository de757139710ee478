"""Scoring: attachment accuracy, annotator agreement, learning curves."""

from dataclasses import dataclass

import numpy as np

from .constraints import (
    ArcIndex,
    build_gfl_vector,
    compile_gfl_constraints,
    compile_ug_vector,
    merge_constraint_sets_soft,
)
from .features import build_design_matrix
from .optimizer import frank_wolfe_train, parse_corpus
from .treebank import PUNCT_TAG, Corpus


class EvalError(Exception):
    pass


def uas(preds, gold_corpus, exclude_punct=True):
    """Fraction of scored tokens whose predicted head matches the gold head.

    Punctuation-tagged tokens are skipped unless exclude_punct is off; tokens
    without a gold head are never scored.
    """
    if len(preds) != len(gold_corpus.sentences):
        raise EvalError(
            f"prediction count {len(preds)} != sentence count {len(gold_corpus.sentences)}"
        )
    correct = 0
    scored = 0
    for pred, sentence in zip(preds, gold_corpus.sentences):
        if len(pred) != len(sentence):
            raise EvalError(f"sentence {sentence.id}: {len(pred)} predictions for {len(sentence)} tokens")
        for tok, head in zip(sentence.tokens, pred):
            if tok.gold_head is None:
                continue
            if exclude_punct and tok.upos == PUNCT_TAG:
                continue
            scored += 1
            if int(head) == tok.gold_head:
                correct += 1
    if scored == 0:
        raise EvalError("no scored tokens")
    return correct / scored


def _head_assignments(sets, idx):
    """Flatten per-sentence whitelists into {(sentence ordinal, dep): head}."""
    out = {}
    for cs in sets:
        if cs is None:
            continue
        for coord in cs.whitelist:
            i, dep, head = idx.decode(coord)
            out[(i, dep)] = head
    return out


def pairwise_agreement(a_sets, b_sets, idx):
    """Agreement over dependents that both annotators assigned a head.

    Returns the matching fraction, or None when the two annotators share no
    head-assigned dependents.
    """
    a = _head_assignments(a_sets, idx)
    b = _head_assignments(b_sets, idx)
    shared = sorted(set(a) & set(b))
    if not shared:
        return None
    hits = sum(1 for key in shared if a[key] == b[key])
    return hits / len(shared)


@dataclass
class AgreementReport:
    annotators: list
    matrix: np.ndarray  # pairwise agreement, nan where overlap is empty
    avg: np.ndarray  # row mean excluding the diagonal
    total_majority: np.ndarray  # agreement with the pooled majority head of the others
    total_micro: np.ndarray  # arc-level agreement against each other annotator


def agreement_matrix(annotator_sets, idx, annotators=None):
    """Pairwise and total agreement for a list of per-sentence constraint lists.

    The Total column is computed two ways, since pooling is a modeling choice:
    against the majority head among the other annotators on each shared
    dependent (ties toward the smaller head index), and micro-averaged over
    all (dependent, other annotator) assignment pairs.
    """
    n = len(annotator_sets)
    if n < 2:
        raise EvalError("need at least two annotators")
    if annotators is None:
        annotators = [str(i + 1) for i in range(n)]
    assignments = [_head_assignments(sets, idx) for sets in annotator_sets]

    matrix = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(n):
            a, b = assignments[i], assignments[j]
            shared = set(a) & set(b)
            if shared:
                matrix[i, j] = sum(1 for key in shared if a[key] == b[key]) / len(shared)

    avg = np.full(n, np.nan)
    for i in range(n):
        off_diag = [matrix[i, j] for j in range(n) if j != i and not np.isnan(matrix[i, j])]
        if off_diag:
            avg[i] = float(np.mean(off_diag))

    total_majority = np.full(n, np.nan)
    total_micro = np.full(n, np.nan)
    for i in range(n):
        own = assignments[i]
        maj_hits = maj_count = 0
        micro_hits = micro_count = 0
        for key, head in own.items():
            votes = [assignments[j][key] for j in range(n) if j != i and key in assignments[j]]
            if not votes:
                continue
            counts = {}
            for vote in votes:
                counts[vote] = counts.get(vote, 0) + 1
            majority = min(h for h, c in counts.items() if c == max(counts.values()))
            maj_count += 1
            maj_hits += int(majority == head)
            micro_count += len(votes)
            micro_hits += sum(1 for vote in votes if vote == head)
        if maj_count:
            total_majority[i] = maj_hits / maj_count
        if micro_count:
            total_micro[i] = micro_hits / micro_count
    return AgreementReport(
        annotators=list(annotators),
        matrix=matrix,
        avg=avg,
        total_majority=total_majority,
        total_micro=total_micro,
    )


def agreement_tsv(report):
    def fmt(x):
        return "-" if np.isnan(x) else f"{x:.4f}"

    names = report.annotators
    lines = ["annotator\t" + "\t".join(names) + "\tavg\ttotal_majority\ttotal_micro"]
    for i, name in enumerate(names):
        cells = [fmt(report.matrix[i, j]) for j in range(len(names))]
        lines.append(
            f"{name}\t"
            + "\t".join(cells)
            + f"\t{fmt(report.avg[i])}\t{fmt(report.total_majority[i])}\t{fmt(report.total_micro[i])}"
        )
    return "\n".join(lines) + "\n"


def _train_on_records(corpus, records, train_cfg, eval_corpus, rules):
    """Train on the sentences the records annotate, then score the eval split.

    Records from disagreeing annotators are pooled softly: contested arcs
    cancel rather than abort the conglomerate run.
    """
    by_sentence = {}
    for rec in records:
        by_sentence.setdefault(rec.sentence_id, []).append(rec.graph)
    sentences = tuple(s for s in corpus.sentences if s.id in by_sentence)
    if not sentences:
        raise EvalError("no annotated sentences in prefix")
    sub = Corpus(sentences=sentences)
    idx = ArcIndex(sub)
    X, vocab = build_design_matrix(sub, idx)
    u = compile_ug_vector(sub, idx, rules)
    sets = []
    for sentence in sub.sentences:
        compiled = [
            compile_gfl_constraints(graph, sentence, idx) for graph in by_sentence[sentence.id]
        ]
        sets.append(compiled[0] if len(compiled) == 1 else merge_constraint_sets_soft(compiled))
    v = build_gfl_vector(sets, idx.n_arcs)
    model = frank_wolfe_train(sub, X, idx, u, v, train_cfg, vocab=vocab)
    preds = parse_corpus(model, eval_corpus, rules=rules)
    return uas(preds, eval_corpus)


def learning_curve(corpus, records, train_cfg, eval_corpus, rules=None, time_grid=None):
    """UAS over annotation time, per annotator and for the pooled union.

    Records must carry hours; at each grid point every annotator's prefix
    (records with hours <= T) trains its own model, and the union of all
    prefixes trains the conglomerate model.  Rows: (hours, annotator |
    "union", uas); annotators with an empty prefix contribute no row.
    """
    timed = [r for r in records if r.hours is not None]
    if not timed:
        raise EvalError("no records with hours; learning curves need session ordering")
    if time_grid is None:
        time_grid = sorted({r.hours for r in timed})
    annotators = sorted({r.annotator or "anon" for r in timed})
    rows = []
    for t in time_grid:
        prefix = [r for r in timed if r.hours <= t]
        for annotator in annotators:
            own = [r for r in prefix if (r.annotator or "anon") == annotator]
            if own:
                rows.append((t, annotator, _train_on_records(corpus, own, train_cfg, eval_corpus, rules)))
        if prefix:
            rows.append((t, "union", _train_on_records(corpus, prefix, train_cfg, eval_corpus, rules)))
    return rows


def learning_curve_tsv(rows):
    out = ["hours\tannotator\tuas"]
    for hours, annotator, score in rows:
        out.append(f"{hours!r}\t{annotator}\t{score:.6f}")
    return "\n".join(out) + "\n"
