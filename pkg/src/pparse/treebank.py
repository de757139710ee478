"""Reading, writing and filtering of dependency corpora.

The on-disk format is a 4-column TSV (ID, FORM, UPOS, HEAD), one token per
line, sentences separated by a single blank line.  HEAD is "_" for tokens
without a gold head and 0 for tokens attached to the artificial root.  Extra
columns are ignored on read.
"""

from dataclasses import dataclass, field

UNIVERSAL_TAGS = frozenset(
    ["VERB", "NOUN", "PRON", "ADJ", "ADV", "ADP", "CONJ", "DET", "NUM", "PRT", "X", "."]
)

PUNCT_TAG = "."


class CorpusError(Exception):
    """Malformed treebank input or inconsistent head arrays."""


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position within the sentence
    form: str
    upos: str
    gold_head: int | None = None  # 0 = artificial root, None = unannotated


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self):
        return [t.form for t in self.tokens]

    @property
    def tags(self):
        return [t.upos for t in self.tokens]

    def gold_heads(self):
        """Gold head array (length m) or None if any token is unannotated."""
        heads = [t.gold_head for t in self.tokens]
        if any(h is None for h in heads):
            return None
        return heads

    def content_length(self, count_punct=False):
        """Token count, excluding punctuation-tagged tokens unless requested."""
        if count_punct:
            return len(self.tokens)
        return sum(1 for t in self.tokens if t.upos != PUNCT_TAG)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple
    n_arcs: int = field(init=False)

    def __post_init__(self):
        # each of the m dependents has m candidate heads (root + m-1 others)
        object.__setattr__(self, "n_arcs", sum(len(s) ** 2 for s in self.sentences))

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def _parse_head(text, lineno):
    if text == "_":
        return None
    try:
        return int(text)
    except ValueError:
        raise CorpusError(f"line {lineno}: HEAD must be an integer or '_', got {text!r}") from None


def read_conll(stream):
    """Parse a 4-column TSV stream into a Corpus.

    Sentence ids are assigned positionally as s1, s2, ...  Raises CorpusError
    naming the offending line on malformed input.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]

    sentences = []
    current = []

    def flush():
        if not current:
            return
        m = len(current)
        tokens = []
        for expected_index, (lineno, cols) in enumerate(current, start=1):
            index = int(cols[0])
            if index != expected_index:
                raise CorpusError(f"line {lineno}: token ID {index} out of sequence (expected {expected_index})")
            upos = cols[2]
            if upos not in UNIVERSAL_TAGS:
                raise CorpusError(f"line {lineno}: unknown UPOS tag {cols[2]!r}")
            head = _parse_head(cols[3], lineno)
            if head is not None and not (0 <= head <= m and head != index):
                raise CorpusError(f"line {lineno}: HEAD {head} out of range for {m}-token sentence")
            tokens.append(Token(index=index, form=cols[1], upos=upos, gold_head=head))
        sentences.append(Sentence(id=f"s{len(sentences) + 1}", tokens=tuple(tokens)))
        current.clear()

    for lineno, line in enumerate(lines, start=1):
        if line == "":
            flush()
            continue
        cols = line.split("\t")
        if len(cols) < 4:
            raise CorpusError(f"line {lineno}: expected at least 4 tab-separated columns, got {len(cols)}")
        try:
            int(cols[0])
        except ValueError:
            raise CorpusError(f"line {lineno}: token ID must be an integer, got {cols[0]!r}") from None
        current.append((lineno, cols))
    flush()
    return Corpus(sentences=tuple(sentences))


def write_conll(corpus, heads=None):
    """Serialize a corpus back to the 4-column format.

    With heads (a per-sentence list of head arrays) the HEAD column is filled
    from the prediction; otherwise gold heads are written, "_" where absent.
    Output round-trips through read_conll.
    """
    if heads is not None and len(heads) != len(corpus.sentences):
        raise CorpusError(f"got {len(heads)} head arrays for {len(corpus.sentences)} sentences")
    blocks = []
    for i, sent in enumerate(corpus.sentences):
        if heads is None:
            sent_heads = [t.gold_head for t in sent.tokens]
        else:
            sent_heads = list(heads[i])
            if len(sent_heads) != len(sent):
                raise CorpusError(
                    f"sentence {sent.id}: head array length {len(sent_heads)} != {len(sent)} tokens"
                )
        lines = []
        for tok, head in zip(sent.tokens, sent_heads):
            head_col = "_" if head is None else str(int(head))
            lines.append(f"{tok.index}\t{tok.form}\t{tok.upos}\t{head_col}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def filter_by_length(corpus, max_len, count_punct=False):
    """Keep sentences of at most max_len tokens, preserving order.

    Punctuation-tagged tokens are excluded from the count unless count_punct
    is set.
    """
    kept = tuple(s for s in corpus.sentences if s.content_length(count_punct) <= max_len)
    return Corpus(sentences=kept)


def is_valid_tree(heads, single_root=True):
    """True iff the head array forms an acyclic tree rooted at node 0."""
    m = len(heads)
    if m == 0:
        return False
    roots = sum(1 for h in heads if h == 0)
    if roots == 0 or (single_root and roots != 1):
        return False
    for d in range(1, m + 1):
        h = heads[d - 1]
        if h is None or not (0 <= h <= m) or h == d:
            return False
        # walk to the root; more than m steps means a cycle
        steps = 0
        node = d
        while node != 0:
            node = heads[node - 1]
            steps += 1
            if steps > m:
                return False
    return True
