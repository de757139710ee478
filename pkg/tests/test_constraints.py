import numpy as np
import pytest

from pparse.constraints import (
    ArcIndex,
    ConstraintError,
    ConstraintSet,
    RuleSet,
    build_gfl_vector,
    compile_gfl_constraints,
    compile_ug_set,
    compile_ug_vector,
    constraint_rows,
    default_rules,
    merge_constraint_sets,
)
from pparse.decoder import best_tree
from pparse.gfl import parse_gfl
from pparse.synthetic import generate_corpus
from pparse.treebank import read_conll


def corpus_from(*sent_specs):
    blocks = []
    for spec in sent_specs:
        blocks.append("\n".join(f"{i}\t{form}\t{upos}\t_" for i, (form, upos) in enumerate(spec, 1)))
    return read_conll("\n\n".join(blocks) + "\n")


FIG_CORPUS = corpus_from(
    [("congress", "NOUN"), ("passed", "VERB"), ("a", "DET"), ("comprehensive", "ADJ"), ("plan", "NOUN")]
)


def local_arcs(coords, idx):
    return {(idx.decode(c)[1], idx.decode(c)[2]) for c in coords}


class TestArcIndex:
    def test_total_size(self):
        corpus = generate_corpus(15, seed=0)
        idx = ArcIndex(corpus)
        assert idx.n_arcs == corpus.n_arcs

    def test_bijection(self):
        corpus = generate_corpus(10, seed=1)
        idx = ArcIndex(corpus)
        seen = set()
        for i, sentence in enumerate(corpus.sentences):
            m = len(sentence)
            for dep in range(1, m + 1):
                for head in range(0, m + 1):
                    if head == dep:
                        continue
                    coord = idx.encode(i, dep, head)
                    assert idx.decode(coord) == (i, dep, head)
                    seen.add(coord)
        assert seen == set(range(idx.n_arcs))

    def test_invalid_arcs_rejected(self):
        idx = ArcIndex(FIG_CORPUS)
        for dep, head in [(0, 1), (1, 1), (6, 1), (1, 6), (1, -1)]:
            with pytest.raises(ValueError):
                idx.encode(0, dep, head)


class TestUgVector:
    def test_rule_pairs(self):
        corpus = corpus_from([("the", "DET"), ("dog", "NOUN"), ("ran", "VERB")])
        idx = ArcIndex(corpus)
        u = compile_ug_vector(corpus, idx)
        n = idx.n_arcs
        assert u[idx.encode(0, 1, 2)] == 1.0 / n  # NOUN -> DET conforms
        assert u[idx.encode(0, 2, 1)] == 0.0  # DET heads nothing
        assert u[idx.encode(0, 3, 0)] == 1.0 / n  # root -> VERB by default
        assert u[idx.encode(0, 2, 0)] == 0.0  # root -> NOUN does not conform

    def test_root_rule_switchable(self):
        corpus = corpus_from([("ran", "VERB")])
        idx = ArcIndex(corpus)
        u = compile_ug_vector(corpus, idx, RuleSet(root_to_verb=False))
        assert u.sum() == 0.0

    def test_sum_matches_brute_force_scan(self):
        corpus = generate_corpus(12, seed=4)
        idx = ArcIndex(corpus)
        rules = default_rules()
        u = compile_ug_vector(corpus, idx)
        # independent double loop over all candidate arcs
        count = 0
        for sentence in corpus.sentences:
            tags = sentence.tags
            for dep in range(1, len(tags) + 1):
                for head in range(0, len(tags) + 1):
                    if head == dep:
                        continue
                    if head == 0:
                        count += tags[dep - 1] == "VERB"
                    else:
                        count += (tags[head - 1], tags[dep - 1]) in rules.pairs
        assert np.isclose(u.sum(), count / idx.n_arcs)
        assert len(compile_ug_set(corpus, idx)) == count

    def test_entries_are_zero_or_inverse_n(self):
        corpus = generate_corpus(8, seed=6)
        idx = ArcIndex(corpus)
        u = compile_ug_vector(corpus, idx)
        assert set(np.unique(u)) <= {0.0, 1.0 / idx.n_arcs}


class TestGflCompilation:
    def test_bracket_example_memberships(self):
        sent = FIG_CORPUS.sentences[0]
        idx = ArcIndex(FIG_CORPUS)
        g = parse_gfl("congress > passed  (a comprehensive plan) < passed", sent)
        cs = compile_gfl_constraints(g, sent, idx)
        white = local_arcs(cs.whitelist, idx)
        black = local_arcs(cs.blacklist, idx)
        assert white == {(1, 2)}
        # all other heads of congress, including the root arc
        assert {(1, h) for h in (0, 3, 4, 5)} <= black
        assert (1, 5) in black  # congress headed by plan
        assert (5, 1) in black  # plan headed by congress
        # bracket members cannot be headed from outside except by 'passed'
        assert {(3, 0), (4, 0), (5, 0), (3, 1), (4, 1), (5, 1)} <= black
        # 'passed' may not be headed by bracket members
        assert {(2, 3), (2, 4), (2, 5)} <= black
        # bracket-internal arcs and attachments to 'passed' stay unconstrained
        free = {(3, 2), (4, 2), (5, 2), (3, 4), (3, 5), (4, 3), (4, 5), (5, 3), (5, 4)}
        assert free.isdisjoint(black) and free.isdisjoint(white | black - black)

    def test_empty_graph_empty_sets(self):
        from pparse.gfl import EMPTY_GRAPH

        sent = FIG_CORPUS.sentences[0]
        idx = ArcIndex(FIG_CORPUS)
        cs = compile_gfl_constraints(EMPTY_GRAPH, sent, idx)
        assert cs.whitelist == frozenset() and cs.blacklist == frozenset()

    def test_internal_head_blacklists_fellow_members(self):
        sent = FIG_CORPUS.sentences[0]
        idx = ArcIndex(FIG_CORPUS)
        g = parse_gfl("(a comprehensive plan*) < passed", sent)
        cs = compile_gfl_constraints(g, sent, idx)
        black = local_arcs(cs.blacklist, idx)
        assert (5, 3) in black and (5, 4) in black  # plan not headed inside
        assert (3, 5) not in black and (4, 5) not in black  # other members may hang under plan

    def test_root_mark_constraints(self):
        corpus = corpus_from([("it", "PRON"), ("ran", "VERB"), ("fast", "ADV")])
        idx = ArcIndex(corpus)
        sent = corpus.sentences[0]
        g = parse_gfl("ran**", sent)
        cs = compile_gfl_constraints(g, sent, idx)
        assert local_arcs(cs.whitelist, idx) == {(2, 0)}
        black = local_arcs(cs.blacklist, idx)
        assert {(2, 1), (2, 3), (1, 0), (3, 0)} <= black

    def test_root_mark_head_conflict_caught_by_validation(self):
        corpus = corpus_from([("it", "PRON"), ("ran", "VERB")])
        idx = ArcIndex(corpus)
        sent = corpus.sentences[0]
        g = parse_gfl("it > ran  it**", sent)
        with pytest.raises(ConstraintError, match="root-marked"):
            compile_gfl_constraints(g, sent, idx)

    def test_conflict_raises_with_fragments(self):
        sent = FIG_CORPUS.sentences[0]
        idx = ArcIndex(FIG_CORPUS)
        # the edge whitelists plan <- congress, the bracket blacklists it
        g = parse_gfl("plan > congress  (a comprehensive plan) < passed", sent)
        with pytest.raises(ConstraintError, match="contradictory"):
            compile_gfl_constraints(g, sent, idx)

    def test_gold_tree_whitelist_forces_gold_decode(self):
        corpus = corpus_from(
            [("the", "DET"), ("old", "ADJ"), ("dog", "NOUN"), ("ran", "VERB"), ("fast", "ADV")]
        )
        idx = ArcIndex(corpus)
        sent = corpus.sentences[0]
        gold = [3, 3, 4, 0, 4]
        g = parse_gfl("the > dog  old > dog  dog > ran  ran**  fast > ran", sent)
        cs = compile_gfl_constraints(g, sent, idx)
        rng = np.random.default_rng(0)
        for _ in range(20):
            scores = rng.normal(size=(6, 6))
            xi = 10.0
            for coord in cs.whitelist:
                _, d, h = idx.decode(coord)
                scores[h, d] += xi
            for coord in cs.blacklist:
                _, d, h = idx.decode(coord)
                scores[h, d] -= xi
            assert list(best_tree(scores)) == gold


class TestGflVector:
    def test_three_way_values(self):
        sent = FIG_CORPUS.sentences[0]
        idx = ArcIndex(FIG_CORPUS)
        g = parse_gfl("congress > passed  (a comprehensive plan) < passed", sent)
        cs = compile_gfl_constraints(g, sent, idx)
        v = build_gfl_vector([cs], idx.n_arcs)
        n = idx.n_arcs
        assert np.sum(v == 1.0 / n) == 1
        assert np.sum(v == -1.0 / n) == len(cs.blacklist)
        assert np.isclose(v.sum(), (len(cs.whitelist) - len(cs.blacklist)) / n)

    def test_no_annotation_gives_zero_vector(self):
        idx = ArcIndex(FIG_CORPUS)
        v = build_gfl_vector([None], idx.n_arcs)
        assert not v.any()

    def test_constraint_set_invariants(self):
        with pytest.raises(ConstraintError):
            ConstraintSet(whitelist=frozenset({3}), blacklist=frozenset({3}))
        with pytest.raises(ConstraintError):
            merge_constraint_sets(
                [ConstraintSet(whitelist=frozenset({3})), ConstraintSet(blacklist=frozenset({3}))]
            )


def test_constraint_rows_audit_format():
    sent = FIG_CORPUS.sentences[0]
    idx = ArcIndex(FIG_CORPUS)
    g = parse_gfl("congress > passed", sent)
    cs = compile_gfl_constraints(g, sent, idx)
    rows = constraint_rows(FIG_CORPUS, idx, [cs])
    assert ("s1", 1, 2, "W") in rows
    assert ("s1", 1, 0, "B") in rows
    assert rows == sorted(rows, key=lambda r: (r[0], r[1], r[2]))
