"""Arc indexing plus compilation of rule rewards and annotation constraints.

Candidate arcs of the whole corpus live in one flat coordinate space: sentence
i with m tokens contributes an m*m block (m dependents, each with m candidate
heads: the artificial root plus the m-1 other tokens).  The rule reward vector
u and the annotation reward vector v are dense vectors over that space with
entries in {-1/n, 0, 1/n}.
"""

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .gfl import validate


class ConstraintError(Exception):
    """Contradictory annotation constraints."""


class ArcIndex:
    """Bijection between (sentence ordinal, dependent, head) and flat coordinates."""

    def __init__(self, corpus):
        self.sizes = [len(s) for s in corpus.sentences]
        self.offsets = []
        total = 0
        for m in self.sizes:
            self.offsets.append(total)
            total += m * m
        self.n_arcs = total
        self._ordinal_by_id = {s.id: i for i, s in enumerate(corpus.sentences)}
        if len(self._ordinal_by_id) != len(corpus.sentences):
            raise ValueError("corpus has duplicate sentence ids")

    def ordinal_of(self, sentence_id):
        return self._ordinal_by_id[sentence_id]

    def encode(self, i, dep, head):
        m = self.sizes[i]
        if not (1 <= dep <= m and 0 <= head <= m and head != dep):
            raise ValueError(f"invalid arc (sentence {i}, dep {dep}, head {head}) for length {m}")
        slot = head if head < dep else head - 1
        return self.offsets[i] + (dep - 1) * m + slot

    def decode(self, coord):
        if not (0 <= coord < self.n_arcs):
            raise ValueError(f"coordinate {coord} out of range")
        i = bisect_right(self.offsets, coord) - 1
        m = self.sizes[i]
        local = coord - self.offsets[i]
        dep = local // m + 1
        slot = local % m
        head = slot if slot < dep else slot + 1
        return i, dep, head

    def sentence_slice(self, i):
        m = self.sizes[i]
        return slice(self.offsets[i], self.offsets[i] + m * m)

    def arcs(self, i):
        """Yield (coord, dep, head) for every candidate arc of sentence i."""
        m = self.sizes[i]
        coord = self.offsets[i]
        for dep in range(1, m + 1):
            for head in range(0, m + 1):
                if head == dep:
                    continue
                yield coord, dep, head
                coord += 1


# head-tag -> dependent-tag pairs defining the rule-conforming arc set
DEFAULT_RULE_PAIRS = (
    ("VERB", "VERB"),
    ("VERB", "NOUN"),
    ("VERB", "PRON"),
    ("VERB", "ADV"),
    ("VERB", "ADP"),
    ("ADJ", "ADV"),
    ("NOUN", "NOUN"),
    ("NOUN", "ADJ"),
    ("NOUN", "DET"),
    ("NOUN", "NUM"),
    ("NOUN", "CONJ"),
    ("ADP", "NOUN"),
)


@dataclass(frozen=True)
class RuleSet:
    pairs: tuple = DEFAULT_RULE_PAIRS
    # the rule table has no entry for the artificial root; preferring verbal
    # roots is a documented default that can be switched off
    root_to_verb: bool = True

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate rule pairs")

    def conforms(self, sentence, dep, head):
        dep_tag = sentence.tokens[dep - 1].upos
        if head == 0:
            return self.root_to_verb and dep_tag == "VERB"
        return (sentence.tokens[head - 1].upos, dep_tag) in self.pairs


def default_rules():
    return RuleSet()


@dataclass(frozen=True)
class ConstraintSet:
    """Whitelisted and blacklisted arcs of one sentence, in corpus coordinates."""

    whitelist: frozenset = frozenset()
    blacklist: frozenset = frozenset()
    ug_set: frozenset = frozenset()

    def __post_init__(self):
        overlap = self.whitelist & self.blacklist
        if overlap:
            raise ConstraintError(f"arcs both whitelisted and blacklisted: {sorted(overlap)}")


EMPTY_CONSTRAINTS = ConstraintSet()


def compile_ug_set(corpus, idx, rules=None):
    """Flat coordinates of all rule-conforming arcs."""
    rules = rules or default_rules()
    conforming = set()
    for i, sentence in enumerate(corpus.sentences):
        for coord, dep, head in idx.arcs(i):
            if rules.conforms(sentence, dep, head):
                conforming.add(coord)
    return frozenset(conforming)


def compile_ug_vector(corpus, idx, rules=None):
    """Reward vector u with u_i = 1/n on rule-conforming arcs, 0 elsewhere."""
    u = np.zeros(idx.n_arcs)
    coords = sorted(compile_ug_set(corpus, idx, rules))
    if coords:
        u[coords] = 1.0 / idx.n_arcs
    return u


class _SentenceConstraints:
    """Collects whitelist/blacklist entries with provenance for diagnostics."""

    def __init__(self, idx, ordinal, m):
        self.idx = idx
        self.ordinal = ordinal
        self.m = m
        self.white = {}
        self.black = {}

    def whitelist(self, head, dep, why):
        coord = self.idx.encode(self.ordinal, dep, head)
        self.white.setdefault(coord, why)

    def blacklist(self, head, dep, why):
        coord = self.idx.encode(self.ordinal, dep, head)
        self.black.setdefault(coord, why)

    def whitelist_arc_with_propagation(self, head, dep, why):
        """Pin dep's head -- every other candidate head is excluded."""
        self.whitelist(head, dep, why)
        for other in range(0, self.m + 1):
            if other != head and other != dep:
                self.blacklist(other, dep, f"{why}; single head for position {dep}")

    def finish(self):
        conflicts = sorted(set(self.white) & set(self.black))
        if conflicts:
            details = []
            for coord in conflicts:
                _, dep, head = self.idx.decode(coord)
                details.append(
                    f"arc head={head} dep={dep}: whitelisted by [{self.white[coord]}], "
                    f"blacklisted by [{self.black[coord]}]"
                )
            raise ConstraintError("contradictory annotation fragments: " + "; ".join(details))
        by_dep = {}
        for coord in self.white:
            _, dep, head = self.idx.decode(coord)
            by_dep.setdefault(dep, set()).add(head)
        multi = {d: hs for d, hs in by_dep.items() if len(hs) > 1}
        if multi:
            raise ConstraintError(f"dependents with two whitelisted heads: {multi}")
        return ConstraintSet(whitelist=frozenset(self.white), blacklist=frozenset(self.black))


def compile_gfl_constraints(graph, sentence, idx):
    """Compile one sentence's fragment graph into whitelist/blacklist sets.

    Dependency edges pin the dependent's head.  A bracket forbids arcs from
    inside heading words outside; an externally headed bracket additionally
    forbids members being headed from anywhere outside except the attachment
    token, and a starred member cannot be headed by a fellow member.
    """
    problems = validate(graph, sentence)
    if problems:
        raise ConstraintError(f"invalid fragment graph for {sentence.id}: " + "; ".join(problems))
    ordinal = idx.ordinal_of(sentence.id)
    m = len(sentence)
    sc = _SentenceConstraints(idx, ordinal, m)

    def name(i):
        return sentence.tokens[i - 1].form

    for head, dep in sorted(graph.dep_edges):
        sc.whitelist_arc_with_propagation(head, dep, f"edge {name(dep)} > {name(head)}")

    for root in sorted(graph.root_marks):
        sc.whitelist_arc_with_propagation(0, root, f"root mark {name(root)}**")
        for other in range(1, m + 1):
            if other != root:
                sc.blacklist(0, other, f"root mark {name(root)}** excludes other root arcs")

    for b in graph.brackets:
        members = set(b.members)
        label = "(" + " ".join(name(i) for i in b.members) + ")"
        outside = [t for t in range(1, m + 1) if t not in members]
        for inside in sorted(members):
            for out in outside:
                sc.blacklist(inside, out, f"bracket {label} cannot head outside words")
        if b.external_head is not None:
            ext = b.external_head
            for member in sorted(members):
                for out_head in [0] + outside:
                    if out_head != ext and out_head != member:
                        sc.blacklist(
                            out_head, member, f"bracket {label} attaches only via {name(ext)}"
                        )
        if b.head is not None:
            for member in sorted(members):
                if member != b.head:
                    sc.blacklist(member, b.head, f"bracket head {name(b.head)}* not headed inside {label}")

    return sc.finish()


def merge_constraint_sets(sets):
    """Union per-sentence constraint sets (e.g. several annotators); conflicts raise."""
    white = set()
    black = set()
    for cs in sets:
        white |= cs.whitelist
        black |= cs.blacklist
    return ConstraintSet(whitelist=frozenset(white), blacklist=frozenset(black))


def merge_constraint_sets_soft(sets):
    """Pool constraint sets from disagreeing annotators.

    Arcs that one annotator whitelists and another blacklists cancel out and
    are dropped, so the merge is always consistent; uncontested entries
    survive.  Used for conglomerate (union) training sets.
    """
    white = set()
    black = set()
    for cs in sets:
        white |= cs.whitelist
        black |= cs.blacklist
    contested = white & black
    return ConstraintSet(whitelist=frozenset(white - contested), blacklist=frozenset(black - contested))


def build_gfl_vector(sets, n_arcs):
    """Reward vector v: +1/n on whitelisted arcs, -1/n on blacklisted, else 0."""
    v = np.zeros(n_arcs)
    scale = 1.0 / n_arcs
    for cs in sets:
        if cs is None:
            continue
        if cs.whitelist:
            v[sorted(cs.whitelist)] = scale
        if cs.blacklist:
            v[sorted(cs.blacklist)] = -scale
    return v


def constraint_rows(corpus, idx, sets):
    """Audit rows (sentence-id, dep, head, W|B), deterministically ordered."""
    rows = []
    for i, sentence in enumerate(corpus.sentences):
        cs = sets[i]
        if cs is None:
            continue
        marks = [(coord, "W") for coord in cs.whitelist] + [(coord, "B") for coord in cs.blacklist]
        for coord, mark in sorted(marks):
            _, dep, head = idx.decode(coord)
            rows.append((sentence.id, dep, head, mark))
    return rows
