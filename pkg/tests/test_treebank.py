import io

import pytest

from pparse.synthetic import generate_corpus
from pparse.treebank import (
    Corpus,
    CorpusError,
    Sentence,
    Token,
    filter_by_length,
    is_valid_tree,
    read_conll,
    write_conll,
)

TWO_TOKENS = "1\tthe\tDET\t2\n2\tdog\tNOUN\t0\n"


def test_read_minimal_sentence():
    corpus = read_conll(TWO_TOKENS)
    assert len(corpus) == 1
    sent = corpus.sentences[0]
    assert sent.id == "s1"
    assert [t.form for t in sent.tokens] == ["the", "dog"]
    assert [t.gold_head for t in sent.tokens] == [2, 0]
    assert is_valid_tree(sent.gold_heads())


def test_read_unannotated_heads():
    corpus = read_conll("1\tthe\tDET\t_\n2\tdog\tNOUN\t_\n")
    sent = corpus.sentences[0]
    assert all(t.gold_head is None for t in sent.tokens)
    assert sent.gold_heads() is None


def test_seven_token_sentence_contributes_49_arcs():
    lines = [f"{i}\tw{i}\tNOUN\t0" for i in range(1, 8)]
    corpus = read_conll("\n".join(lines) + "\n")
    assert corpus.n_arcs == 49


def test_n_arcs_is_sum_of_squares():
    corpus = generate_corpus(25, seed=3)
    assert corpus.n_arcs == sum(len(s) ** 2 for s in corpus.sentences)


def test_read_accepts_stream_and_extra_columns():
    stream = io.StringIO("1\tthe\tDET\t2\textra\tcols\n2\tdog\tNOUN\t0\n")
    corpus = read_conll(stream)
    assert corpus.sentences[0].tokens[0].form == "the"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("1\tthe\tDET\n", "line 1"),  # missing HEAD column
        ("1\tthe\tDXT\t2\n2\tdog\tNOUN\t0\n", "line 1"),  # unknown tag
        ("1\tthe\tDET\tx\n", "line 1"),  # non-integer head
        ("x\tthe\tDET\t2\n", "line 1"),  # non-integer id
        ("1\tthe\tDET\t2\n3\tdog\tNOUN\t0\n", "line 2"),  # id out of sequence
        ("1\tthe\tDET\t5\n2\tdog\tNOUN\t0\n", "line 1"),  # head out of range
        ("1\tthe\tDET\t1\n", "line 1"),  # self-headed
    ],
)
def test_read_errors_name_line(text, fragment):
    with pytest.raises(CorpusError, match=fragment):
        read_conll(text)


def test_write_fills_heads_from_prediction():
    corpus = read_conll("1\tthe\tDET\t_\n2\tdog\tNOUN\t_\n")
    assert write_conll(corpus, [[2, 0]]) == "1\tthe\tDET\t2\n2\tdog\tNOUN\t0\n"


def test_write_length_mismatch_names_sentence():
    corpus = read_conll(TWO_TOKENS)
    with pytest.raises(CorpusError, match="s1"):
        write_conll(corpus, [[2, 0, 1]])


def test_round_trip_identity():
    corpus = generate_corpus(30, seed=11)
    again = read_conll(write_conll(corpus))
    assert again == corpus
    # and with missing heads
    partial = read_conll("1\ta\tDET\t_\n2\tb\tNOUN\t0\n\n1\tc\tVERB\t0\n")
    assert read_conll(write_conll(partial)) == partial


def _punct_sentence():
    # 12 tokens, 3 punctuation
    tokens = []
    for i in range(1, 13):
        upos = "." if i in (4, 8, 12) else "NOUN"
        tokens.append(Token(index=i, form=f"w{i}", upos=upos, gold_head=0 if i == 1 else 1))
    return Sentence(id="p1", tokens=tuple(tokens))


def test_filter_by_length_punctuation_convention():
    corpus = Corpus(sentences=(_punct_sentence(),))
    assert len(filter_by_length(corpus, 10, count_punct=False)) == 1  # 9 content tokens
    assert len(filter_by_length(corpus, 10, count_punct=True)) == 0  # 12 > 10


def test_filter_preserves_order_and_is_idempotent():
    corpus = generate_corpus(40, seed=5)
    once = filter_by_length(corpus, 7)
    assert [s.id for s in once.sentences] == [s.id for s in corpus.sentences if s.content_length() <= 7]
    assert filter_by_length(once, 7) == once
    assert once.n_arcs == sum(len(s) ** 2 for s in once.sentences)
