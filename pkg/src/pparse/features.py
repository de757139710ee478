"""Delexicalized arc features and the sparse design matrix.

Every candidate arc maps to a fixed number of binary indicator features built
from universal POS tags, attachment direction, binned signed distance and the
tags adjacent to head and dependent.  Rows of the design matrix follow the
flat arc coordinates of an ArcIndex; columns are the lexicographically sorted
feature vocabulary, so the matrix is reproducible bit for bit.
"""

import numpy as np
from scipy import sparse

ROOT_TAG = "ROOT"
BOUNDARY_LEFT = "<S>"
BOUNDARY_RIGHT = "</S>"
NONE_TAG = "NONE"

TEMPLATE_COUNT = 11


def _distance_bin(head, dep):
    if head == 0:
        return "root"
    delta = dep - head
    sign = "+" if delta > 0 else "-"
    a = abs(delta)
    if a <= 2:
        return f"{sign}{a}"
    if a <= 5:
        return f"{sign}3-5"
    if a <= 10:
        return f"{sign}6-10"
    return f"{sign}>10"


def extract_arc_features(sentence, head, dep):
    """Feature names for the arc head -> dep (head 0 is the artificial root)."""
    tags = sentence.tags
    m = len(tags)

    def tag_at(pos):
        if pos < 1:
            return BOUNDARY_LEFT
        if pos > m:
            return BOUNDARY_RIGHT
        return tags[pos - 1]

    dp = tags[dep - 1]
    if head == 0:
        hp = ROOT_TAG
        direction = "root"
        hm1 = hp1 = NONE_TAG
    else:
        hp = tags[head - 1]
        direction = "R" if dep > head else "L"
        hm1 = tag_at(head - 1)
        hp1 = tag_at(head + 1)
    dist = _distance_bin(head, dep)
    pair = f"hp={hp}|dp={dp}"
    return [
        "bias",
        f"hp={hp}",
        f"dp={dp}",
        pair,
        f"dir={direction}",
        f"{pair}|dir={direction}",
        f"dist={dist}|{pair}",
        f"hm1={hm1}|{pair}",
        f"hp1={hp1}|{pair}",
        f"dm1={tag_at(dep - 1)}|{pair}",
        f"dp1={tag_at(dep + 1)}|{pair}",
    ]


class FeatureVocabulary:
    """Frozen feature-name <-> column bijection in lexicographic order."""

    def __init__(self, names):
        self.names = tuple(names)
        self.index = {name: col for col, name in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise ValueError("duplicate feature names")

    @classmethod
    def from_corpus(cls, corpus):
        seen = set()
        for sentence in corpus.sentences:
            m = len(sentence)
            for dep in range(1, m + 1):
                for head in range(0, m + 1):
                    if head != dep:
                        seen.update(extract_arc_features(sentence, head, dep))
        return cls(sorted(seen))

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def column(self, name):
        return self.index[name]

    def dump(self):
        """TSV text (feature-name, column) for model inspection."""
        return "".join(f"{name}\t{col}\n" for col, name in enumerate(self.names))


def build_design_matrix(corpus, idx, vocab=None):
    """Sparse binary matrix with one row per candidate arc.

    Returns (matrix, vocabulary).  With an explicit vocabulary (e.g. from a
    loaded model), unknown features are dropped rather than extended.
    """
    if vocab is None:
        vocab = FeatureVocabulary.from_corpus(corpus)
    indptr = [0]
    indices = []
    for i, sentence in enumerate(corpus.sentences):
        for _, dep, head in idx.arcs(i):
            cols = sorted(
                vocab.index[name]
                for name in extract_arc_features(sentence, head, dep)
                if name in vocab.index
            )
            indices.extend(cols)
            indptr.append(len(indices))
    data = np.ones(len(indices))
    matrix = sparse.csr_matrix(
        (data, np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(idx.n_arcs, len(vocab)),
    )
    return matrix, vocab


def arc_score_rows(sentence, vocab, w):
    """Model scores for all candidate arcs of one sentence.

    Returns an (m+1) x (m+1) array where entry [h, d] is w . x(h, d); the
    diagonal and column 0 are unused.
    """
    m = len(sentence)
    scores = np.zeros((m + 1, m + 1))
    for dep in range(1, m + 1):
        for head in range(0, m + 1):
            if head == dep:
                continue
            total = 0.0
            for name in extract_arc_features(sentence, head, dep):
                col = vocab.index.get(name)
                if col is not None:
                    total += w[col]
            scores[head, dep] = total
    return scores
