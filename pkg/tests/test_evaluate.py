import numpy as np
import pytest

from pparse.constraints import ArcIndex, ConstraintSet
from pparse.evaluate import (
    EvalError,
    agreement_matrix,
    agreement_tsv,
    learning_curve,
    pairwise_agreement,
    uas,
)
from pparse.gfl import FragmentGraph, GflRecord
from pparse.optimizer import TrainConfig
from pparse.synthetic import generate_corpus
from pparse.treebank import read_conll


def corpus_from_heads(*head_lists, punct_at=()):
    blocks = []
    for si, heads in enumerate(head_lists):
        lines = []
        for i, h in enumerate(heads, start=1):
            upos = "." if (si, i) in punct_at else "NOUN"
            lines.append(f"{i}\tw{si}_{i}\t{upos}\t{h}")
        blocks.append("\n".join(lines))
    return read_conll("\n\n".join(blocks) + "\n")


class TestUas:
    def test_perfect_prediction(self):
        corpus = corpus_from_heads([0, 1, 2], [2, 0])
        preds = [[0, 1, 2], [2, 0]]
        assert uas(preds, corpus) == 1.0

    def test_right_branching_hand_count(self):
        # hand-built: 5 of 14 non-punct heads are the previous word
        corpus = corpus_from_heads(
            [3, 3, 0],  # 0 RB hits
            [0, 1, 2, 3, 1],  # 4 hits, token 5 is punctuation
            [2, 0, 4, 2],  # 0 hits
            [0, 3, 1],  # 1 hit
            punct_at={(1, 5)},
        )
        preds = [list(range(len(s))) for s in corpus.sentences]
        assert uas(preds, corpus) == pytest.approx(5 / 14)
        assert uas(preds, corpus, exclude_punct=False) == pytest.approx(5 / 15)

    def test_unannotated_tokens_not_scored(self):
        corpus = read_conll("1\ta\tNOUN\t_\n2\tb\tVERB\t0\n")
        assert uas([[2, 0]], corpus) == 1.0

    def test_empty_corpus_errors(self):
        corpus = corpus_from_heads([0, 1], punct_at={(0, 1), (0, 2)})
        with pytest.raises(EvalError, match="no scored tokens"):
            uas([[0, 1]], corpus)

    def test_alignment_mismatch_names_sentence(self):
        corpus = corpus_from_heads([0, 1, 2])
        with pytest.raises(EvalError, match="s1"):
            uas([[0, 1]], corpus)
        with pytest.raises(EvalError, match="count"):
            uas([], corpus)


def make_sets(corpus, idx, assignments):
    """Per-sentence ConstraintSets from {sentence ordinal: {dep: head}}."""
    sets = []
    for i in range(len(corpus.sentences)):
        wanted = assignments.get(i, {})
        coords = frozenset(idx.encode(i, dep, head) for dep, head in wanted.items())
        sets.append(ConstraintSet(whitelist=coords))
    return sets


@pytest.fixture()
def agreement_fixture():
    corpus = corpus_from_heads([0, 1, 2, 3], [2, 0, 2])
    idx = ArcIndex(corpus)
    return corpus, idx


class TestAgreement:
    def test_identical_annotations_agree_fully(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0, 2: 1}})
        assert pairwise_agreement(a, a, idx) == 1.0

    def test_disjoint_coverage_is_absent(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0}})
        b = make_sets(corpus, idx, {0: {2: 1}})
        assert pairwise_agreement(a, b, idx) is None

    def test_hand_built_three_of_four(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0, 2: 1, 3: 2}, 1: {1: 2}})
        b = make_sets(corpus, idx, {0: {1: 0, 2: 3, 3: 2}, 1: {1: 2}})
        assert pairwise_agreement(a, b, idx) == 0.75

    def test_two_identical_annotators_matrix(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0, 2: 1}})
        report = agreement_matrix([a, a], idx)
        assert np.array_equal(report.matrix, np.ones((2, 2)))
        assert list(report.total_majority) == [1.0, 1.0]

    def test_matrix_symmetric_on_random_annotations(self, agreement_fixture):
        corpus, idx = agreement_fixture
        rng = np.random.default_rng(4)
        annotators = []
        for _ in range(4):
            assignment = {}
            for i, sentence in enumerate(corpus.sentences):
                picks = {}
                for dep in range(1, len(sentence) + 1):
                    if rng.random() < 0.6:
                        choices = [h for h in range(len(sentence) + 1) if h != dep]
                        picks[dep] = int(rng.choice(choices))
                assignment[i] = picks
            annotators.append(make_sets(corpus, idx, assignment))
        report = agreement_matrix(annotators, idx)
        mat = report.matrix
        assert np.array_equal(np.isnan(mat), np.isnan(mat.T))
        assert np.allclose(mat[~np.isnan(mat)], mat.T[~np.isnan(mat.T)])
        for i in range(4):
            assert np.isnan(mat[i, i]) or mat[i, i] == 1.0

    def test_avg_column_excludes_diagonal(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0, 2: 1}})
        b = make_sets(corpus, idx, {0: {1: 0, 2: 3}})
        c = make_sets(corpus, idx, {0: {1: 2, 2: 1}})
        report = agreement_matrix([a, b, c], idx)
        # pairwise: ab = 1/2, ac = 1/2, bc = 0
        assert report.matrix[0, 1] == 0.5 and report.matrix[0, 2] == 0.5 and report.matrix[1, 2] == 0.0
        assert report.avg[0] == 0.5
        assert report.avg[1] == 0.25
        assert report.avg[2] == 0.25

    def test_total_majority_and_micro(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0}})
        b = make_sets(corpus, idx, {0: {1: 0}})
        c = make_sets(corpus, idx, {0: {1: 2}})
        report = agreement_matrix([a, b, c], idx)
        # a vs pooled majority of {b: 0, c: 2} -> majority 0 (tie toward smaller head)
        assert report.total_majority[0] == 1.0
        assert report.total_micro[0] == 0.5
        assert report.total_majority[2] == 0.0

    def test_tsv_render(self, agreement_fixture):
        corpus, idx = agreement_fixture
        a = make_sets(corpus, idx, {0: {1: 0}})
        report = agreement_matrix([a, a], idx, annotators=["x", "y"])
        text = agreement_tsv(report)
        assert text.splitlines()[0].startswith("annotator\tx\ty")

    def test_needs_two_annotators(self, agreement_fixture):
        corpus, idx = agreement_fixture
        with pytest.raises(EvalError):
            agreement_matrix([make_sets(corpus, idx, {})], idx)


def graph_from_heads(heads):
    return FragmentGraph(
        dep_edges=frozenset((h, d) for d, h in enumerate(heads, start=1) if h != 0),
        brackets=(),
        root_marks=frozenset(d for d, h in enumerate(heads, start=1) if h == 0),
    )


@pytest.fixture(scope="module")
def data():
    corpus = generate_corpus(16, seed=40)
    eval_corpus = generate_corpus(30, seed=41)
    cfg = TrainConfig(mu=0.1, xi=1.0, max_iters=12, gap_tol=1e-6, step_rule="line_search")
    return corpus, eval_corpus, cfg


class TestLearningCurve:
    def test_single_annotator_single_prefix(self, data):
        corpus, eval_corpus, cfg = data
        records = [
            GflRecord(sentence_id=s.id, graph=graph_from_heads(s.gold_heads()), annotator="a", hours=1.0)
            for s in corpus.sentences[:6]
        ]
        rows = learning_curve(corpus, records, cfg, eval_corpus)
        assert [(r[0], r[1]) for r in rows] == [(1.0, "a"), (1.0, "union")]
        assert rows[0][2] == rows[1][2]  # union of one annotator is that annotator

    def test_union_pools_prefixes(self, data):
        corpus, eval_corpus, cfg = data

        def noisy_graph(sentence):
            # a deliberately wrong but valid tree: right-branching heads
            return graph_from_heads(list(range(len(sentence))))

        records = []
        for i, s in enumerate(corpus.sentences[:10]):
            records.append(
                GflRecord(
                    sentence_id=s.id,
                    graph=graph_from_heads(s.gold_heads()),
                    annotator="good",
                    hours=1.0 if i < 5 else 2.0,
                )
            )
        for i, s in enumerate(corpus.sentences[10:16]):
            records.append(
                GflRecord(sentence_id=s.id, graph=noisy_graph(s), annotator="bad", hours=1.0 if i < 3 else 2.0)
            )
        rows = learning_curve(corpus, records, cfg, eval_corpus)
        by_key = {(r[0], r[1]): r[2] for r in rows}
        assert set(by_key) == {(1.0, "good"), (1.0, "bad"), (1.0, "union"), (2.0, "good"), (2.0, "bad"), (2.0, "union")}
        # the pooled curve ends at least as high as the worst individual one
        final = max(r[0] for r in rows)
        individuals = [v for (t, who), v in by_key.items() if t == final and who != "union"]
        assert by_key[(final, "union")] >= min(individuals)

    def test_requires_hours(self, data):
        corpus, eval_corpus, cfg = data
        records = [GflRecord(sentence_id="s1", graph=graph_from_heads([0]), annotator="a")]
        with pytest.raises(EvalError, match="hours"):
            learning_curve(corpus, records, cfg, eval_corpus)
