"""Seeded synthetic treebanks for experiments and tests.

Sentences are sampled from a small head-outward grammar over universal tags:
a verbal root takes a subject noun phrase on the left and optionally an
object, an adverb, a prepositional phrase and a coordinated second clause on
the right.  Prepositional phrases attach ambiguously to the verb or to the
object noun, so tag patterns alone cannot fully determine the tree -- that is
the headroom partial annotations are supposed to buy back.
"""

import numpy as np

from .treebank import Corpus, Sentence, Token

NOUNS = ["dog", "plan", "tax", "law", "firm", "fox", "bill", "report"]
VERBS = ["passed", "saw", "made", "kept", "filed", "ran"]
ADJS = ["big", "red", "old", "new"]
ADVS = ["quickly", "now", "often"]
ADPS = ["in", "of", "with"]
DETS = ["the", "a"]
PRONS = ["he", "it"]
NUMS = ["two", "three"]


class _SentenceBuilder:
    def __init__(self, rng):
        self.rng = rng
        self.forms = []
        self.tags = []
        self.heads = []

    def add(self, form, tag, head):
        self.forms.append(form)
        self.tags.append(tag)
        self.heads.append(head)
        return len(self.forms)

    def pick(self, options):
        return options[int(self.rng.integers(len(options)))]

    def noun_phrase(self, head):
        """DET? NUM? ADJ* NOUN, everything under the noun; returns its position."""
        start = len(self.forms) + 1
        n_pre = 0
        if self.rng.random() < 0.65:
            self.add(self.pick(DETS), "DET", 0)
            n_pre += 1
        if self.rng.random() < 0.12:
            self.add(self.pick(NUMS), "NUM", 0)
            n_pre += 1
        while self.rng.random() < 0.35 and n_pre < 3:
            self.add(self.pick(ADJS), "ADJ", 0)
            n_pre += 1
        noun = self.add(self.pick(NOUNS), "NOUN", head)
        for pos in range(start, noun):
            self.heads[pos - 1] = noun
        return noun


def _generate_sentence(rng, max_len):
    b = _SentenceBuilder(rng)
    # subject on the left of the verb
    if rng.random() < 0.2:
        b.add(b.pick(PRONS), "PRON", 0)
    else:
        b.noun_phrase(0)
    subj_end = len(b.forms)
    verb = b.add(b.pick(VERBS), "VERB", 0)
    for pos in range(1, subj_end + 1):
        if b.heads[pos - 1] == 0:
            b.heads[pos - 1] = verb
    if rng.random() < 0.3:
        b.add(b.pick(ADVS), "ADV", verb)
    obj = None
    if rng.random() < 0.85:
        obj = b.noun_phrase(verb)
    if obj is not None and rng.random() < 0.18 and len(b.forms) + 2 <= max_len:
        # noun coordination: the second conjunct and the conjunction both
        # attach under the first noun
        b.add("and", "CONJ", obj)
        b.add(b.pick(NOUNS), "NOUN", obj)
    if rng.random() < 0.5 and len(b.forms) + 2 <= max_len:
        adp = b.add(b.pick(ADPS), "ADP", 0)
        # attachment ambiguity: the phrase modifies the verb or the object
        if obj is not None and rng.random() < 0.5:
            b.heads[adp - 1] = obj
        else:
            b.heads[adp - 1] = verb
        b.noun_phrase(adp)
    if rng.random() < 0.4 and len(b.forms) + 1 <= max_len:
        b.add(".", ".", verb)
    return b


def generate_corpus(n_sentences, seed=0, max_len=12):
    """Deterministic synthetic corpus with gold trees."""
    rng = np.random.default_rng(seed)
    sentences = []
    while len(sentences) < n_sentences:
        b = _generate_sentence(rng, max_len)
        if len(b.forms) > max_len:
            continue
        sid = f"s{len(sentences) + 1}"
        tokens = tuple(
            Token(index=i + 1, form=b.forms[i], upos=b.tags[i], gold_head=b.heads[i])
            for i in range(len(b.forms))
        )
        sentences.append(Sentence(id=sid, tokens=tokens))
    return Corpus(sentences=tuple(sentences))


def main(argv=None):
    import argparse

    from .treebank import write_conll

    ap = argparse.ArgumentParser(description="emit a synthetic gold treebank")
    ap.add_argument("--sentences", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-len", type=int, default=12)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    text = write_conll(generate_corpus(args.sentences, seed=args.seed, max_len=args.max_len))
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
