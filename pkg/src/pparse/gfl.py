"""Parser for a defined subset of the Graph Fragment Language.

Supported notation:

* dependency arrows with chaining: ``a > b > c`` attaches a under b and b
  under c (the unit on the open side of the angle is the head); ``x < y`` is
  the mirrored spelling of ``y > x``;
* parenthesized groups ``(w1 w2* w3)`` recording a constituent bracket, with
  an optional ``*`` marking the bracket-internal head;
* bracket attachment: an arrow linking a group and a token records that token
  as the bracket's external head, whichever side of the arrow it appears on
  (a headless group cannot serve as a head, so the token is the only possible
  attachment point);
* ``word**`` marking the sentence root;
* ``word~k`` selecting the k-th occurrence of a repeated surface form.

Everything else (coordination nodes, multiword expressions joined with ``_``,
anaphora links, arrows between two groups) is rejected with an "unsupported
construct" diagnostic rather than guessed at.  Annotation lines for the same
sentence are unioned into a single fragment graph.
"""

import re
from dataclasses import dataclass


class GflError(Exception):
    """Malformed or unsupported GFL annotation."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"char {offset}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Bracket:
    members: tuple  # token indices in appearance order, contiguity not required
    head: int | None = None  # starred member
    external_head: int | None = None  # attachment point outside the bracket


@dataclass(frozen=True)
class FragmentGraph:
    dep_edges: frozenset  # (head index, dependent index) pairs, 1-based
    brackets: tuple
    root_marks: frozenset

    def is_empty(self):
        return not self.dep_edges and not self.brackets and not self.root_marks


EMPTY_GRAPH = FragmentGraph(dep_edges=frozenset(), brackets=(), root_marks=frozenset())

_TOKEN_RE = re.compile(r"\(|\)|>|<|[^\s()<>]+")
_REF_RE = re.compile(r"^(.*?)(?:~(\d+))?(\*{1,2})?$")


class _TokenResolver:
    """Maps annotation words to token indices, case-insensitively."""

    def __init__(self, sentence):
        self.occurrences = {}
        for tok in sentence.tokens:
            self.occurrences.setdefault(tok.form.lower(), []).append(tok.index)

    def resolve(self, word, occurrence, offset):
        if word == "=":
            raise GflError("unsupported construct: anaphora link", offset)
        if word.startswith("$"):
            raise GflError(f"unsupported construct: coordination node {word!r}", offset)
        hits = self.occurrences.get(word.lower())
        if hits is None:
            if "_" in word:
                raise GflError(f"unsupported construct: multiword expression {word!r}", offset)
            raise GflError(f"token {word!r} not found in sentence", offset)
        if occurrence is None:
            if len(hits) > 1:
                raise GflError(
                    f"ambiguous token {word!r} ({len(hits)} occurrences); disambiguate with ~k", offset
                )
            return hits[0]
        if not (1 <= occurrence <= len(hits)):
            raise GflError(f"token {word!r} has only {len(hits)} occurrences, requested ~{occurrence}", offset)
        return hits[occurrence - 1]


class _Builder:
    """Accumulates edges, brackets and root marks across annotation lines."""

    def __init__(self, sentence):
        self.resolver = _TokenResolver(sentence)
        self.head_of = {}  # dependent -> (head, offset where assigned)
        self.brackets = []  # mutable dicts: members/head/external_head
        self.root_marks = set()

    def add_edge(self, head, dep, offset):
        prior = self.head_of.get(dep)
        if prior is not None and prior[0] != head:
            raise GflError(f"token at position {dep} assigned two heads ({prior[0]} and {head})", offset)
        self.head_of[dep] = (head, offset)

    def add_external_head(self, bracket, token, offset):
        if bracket["external_head"] is not None and bracket["external_head"] != token:
            raise GflError(
                f"bracket assigned two external heads ({bracket['external_head']} and {token})", offset
            )
        bracket["external_head"] = token

    def finish(self):
        edges = frozenset((head, dep) for dep, (head, _) in self.head_of.items())
        merged = {}
        for b in self.brackets:
            key = tuple(b["members"])
            prior = merged.get(key)
            if prior is None:
                merged[key] = b
                continue
            for field in ("head", "external_head"):
                if b[field] is not None:
                    if prior[field] is not None and prior[field] != b[field]:
                        raise GflError(f"bracket {key} annotated with conflicting {field} marks")
                    prior[field] = b[field]
        brackets = tuple(
            Bracket(members=tuple(b["members"]), head=b["head"], external_head=b["external_head"])
            for b in sorted(merged.values(), key=lambda b: tuple(b["members"]))
        )
        return FragmentGraph(
            dep_edges=edges, brackets=brackets, root_marks=frozenset(self.root_marks)
        )


def _lex(line, base_offset):
    out = []
    for match in _TOKEN_RE.finditer(line):
        out.append((match.group(0), base_offset + match.start()))
    return out


def _parse_word(builder, word, offset, in_group):
    m = _REF_RE.match(word)
    base, occ, stars = m.group(1), m.group(2), m.group(3)
    if not base:
        raise GflError(f"malformed token reference {word!r}", offset)
    idx = builder.resolver.resolve(base, int(occ) if occ else None, offset)
    if stars == "**":
        builder.root_marks.add(idx)
        return idx, False
    if stars == "*":
        if not in_group:
            raise GflError("head mark '*' outside a bracket", offset)
        return idx, True
    return idx, False


def _parse_unit(builder, toks, pos):
    """Returns (unit, next position); unit is ('tok', index) or ('grp', bracket dict)."""
    word, offset = toks[pos]
    if word == "(":
        members = []
        head = None
        pos += 1
        while pos < len(toks) and toks[pos][0] != ")":
            inner, inner_offset = toks[pos]
            if inner in (">", "<"):
                raise GflError("arrows are not allowed inside a bracket", inner_offset)
            if inner == "(":
                nested, pos = _parse_unit(builder, toks, pos)
                for idx in nested[1]["members"]:
                    if idx in members:
                        raise GflError(f"token at position {idx} listed twice in bracket", inner_offset)
                    members.append(idx)
                continue
            idx, starred = _parse_word(builder, inner, inner_offset, in_group=True)
            if starred:
                if head is not None:
                    raise GflError("bracket has two head marks", inner_offset)
                head = idx
            if idx in members:
                raise GflError(f"token at position {idx} listed twice in bracket", inner_offset)
            members.append(idx)
            pos += 1
        if pos == len(toks):
            raise GflError("unbalanced '('", offset)
        if not members:
            raise GflError("empty bracket", offset)
        bracket = {"members": members, "head": head, "external_head": None}
        builder.brackets.append(bracket)
        return ("grp", bracket), pos + 1
    if word == ")":
        raise GflError("unbalanced ')'", offset)
    if word in (">", "<"):
        raise GflError(f"expected a token or bracket before {word!r}", offset)
    idx, _ = _parse_word(builder, word, offset, in_group=False)
    return ("tok", idx), pos + 1


def _attach(builder, head_unit, dep_unit, offset):
    hk, hv = head_unit
    dk, dv = dep_unit
    if hk == "tok" and dk == "tok":
        builder.add_edge(hv, dv, offset)
    elif hk == "tok" and dk == "grp":
        builder.add_external_head(dv, hv, offset)
    elif hk == "grp" and dk == "tok":
        # a group cannot serve as a head in this subset; the arrow still
        # identifies the token as the bracket's attachment point
        builder.add_external_head(hv, dv, offset)
    else:
        raise GflError("unsupported construct: arrow between two brackets", offset)


def _parse_line(builder, line, base_offset):
    toks = _lex(line, base_offset)
    pos = 0
    while pos < len(toks):
        unit, pos = _parse_unit(builder, toks, pos)
        while pos < len(toks) and toks[pos][0] in (">", "<"):
            arrow, arrow_offset = toks[pos]
            if pos + 1 == len(toks):
                raise GflError(f"dangling {arrow!r}", arrow_offset)
            nxt, pos = _parse_unit(builder, toks, pos + 1)
            if arrow == ">":
                _attach(builder, head_unit=nxt, dep_unit=unit, offset=arrow_offset)
            else:
                _attach(builder, head_unit=unit, dep_unit=nxt, offset=arrow_offset)
            unit = nxt


def parse_gfl(annotation, sentence):
    """Parse annotation text (one or more lines) into a FragmentGraph.

    Raises GflError with a character offset on malformed input, unknown or
    ambiguous tokens, double head assignments, or unsupported constructs.
    """
    builder = _Builder(sentence)
    offset = 0
    for line in annotation.splitlines():
        _parse_line(builder, line, offset)
        offset += len(line) + 1
    return builder.finish()


def validate(graph, sentence):
    """Check invariants; returns a list of violation strings (empty = valid)."""
    violations = []
    m = len(sentence)

    def in_range(i):
        return 1 <= i <= m

    seen_heads = {}
    for head, dep in sorted(graph.dep_edges):
        if not in_range(head) or not in_range(dep) or head == dep:
            violations.append(f"edge ({head},{dep}) out of range")
            continue
        if dep in seen_heads and seen_heads[dep] != head:
            violations.append(f"token {dep} assigned two heads")
        seen_heads[dep] = head

    for dep in sorted(graph.root_marks):
        if not in_range(dep):
            violations.append(f"root mark {dep} out of range")
        elif dep in seen_heads:
            violations.append(f"root-marked token {dep} also assigned head {seen_heads[dep]}")

    for b in graph.brackets:
        members = set(b.members)
        if not all(in_range(i) for i in members):
            violations.append(f"bracket {b.members} out of range")
        if b.head is not None and b.head not in members:
            violations.append(f"bracket head {b.head} not a member of {b.members}")
        if b.external_head is not None and b.external_head in members:
            violations.append(f"external head {b.external_head} inside bracket {b.members}")

    for i, a in enumerate(graph.brackets):
        for b in graph.brackets[i + 1 :]:
            sa, sb = set(a.members), set(b.members)
            common = sa & sb
            if common and not (sa <= sb or sb <= sa):
                violations.append(f"bracket overlap between {a.members} and {b.members}")

    # cycle check over head->dependent edges plus bracket domination: an
    # externally headed bracket hangs entirely under its external head
    adjacency = {}

    def link(src, dst):
        adjacency.setdefault(src, []).append(dst)

    for head, dep in sorted(graph.dep_edges):
        link(("t", head), ("t", dep))
    for j, b in enumerate(graph.brackets):
        if b.external_head is not None:
            link(("t", b.external_head), ("b", j))
            for member in b.members:
                link(("b", j), ("t", member))

    state = {}

    def walk(node):
        state[node] = 1
        for nxt in adjacency.get(node, ()):
            if state.get(nxt) == 1:
                return True
            if state.get(nxt) is None and walk(nxt):
                return True
        state[node] = 2
        return False

    for node in sorted(adjacency):
        if state.get(node) is None and walk(node):
            violations.append("cycle among dependency edges and bracket attachments")
            break

    return violations


def serialize_gfl(graph, sentence):
    """Canonical annotation text that parses back to an equal FragmentGraph."""
    counts = {}
    for tok in sentence.tokens:
        counts[tok.form.lower()] = counts.get(tok.form.lower(), 0) + 1
    seen = {}
    rank = {}
    for tok in sentence.tokens:
        key = tok.form.lower()
        seen[key] = seen.get(key, 0) + 1
        rank[tok.index] = seen[key]

    def ref(i):
        form = sentence.tokens[i - 1].form
        if counts[form.lower()] > 1:
            return f"{form}~{rank[i]}"
        return form

    lines = []
    for dep in sorted(graph.root_marks):
        lines.append(f"{ref(dep)}**")
    for head, dep in sorted(graph.dep_edges, key=lambda e: (e[1], e[0])):
        lines.append(f"{ref(dep)} > {ref(head)}")
    for b in graph.brackets:
        body = " ".join(ref(i) + ("*" if i == b.head else "") for i in b.members)
        if b.external_head is not None:
            lines.append(f"({body}) < {ref(b.external_head)}")
        else:
            lines.append(f"({body})")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class GflRecord:
    sentence_id: str
    graph: FragmentGraph
    annotator: str | None = None
    hours: float | None = None


def read_gfl_file(stream, corpus):
    """Read a GFL sidecar file against a corpus.

    Records are blank-line separated; each starts with ``# id: <sentence-id>``
    and ``# text: <space-joined tokens>`` followed by annotation lines.
    Optional ``# annotator:`` and ``# hours:`` headers are kept for agreement
    and learning-curve computations.  Returns a list of GflRecord.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    by_id = {s.id: s for s in corpus.sentences}

    records = []
    block = []

    def flush():
        if not block:
            return
        header = {}
        body = []
        for lineno, line in block:
            m = re.match(r"#\s*(\w+)\s*:\s*(.*)$", line)
            if m:
                header[m.group(1)] = m.group(2).strip()
            elif line.startswith("#"):
                continue
            else:
                body.append(line)
        sid = header.get("id")
        if sid is None:
            raise GflError(f"record near line {block[0][0]}: missing '# id:' header")
        sentence = by_id.get(sid)
        if sentence is None:
            raise GflError(f"record near line {block[0][0]}: unknown sentence id {sid!r}")
        text = header.get("text")
        if text is not None and text.split() != sentence.forms:
            raise GflError(f"record for {sid}: '# text:' does not match corpus tokens")
        if not body:
            raise GflError(f"record for {sid}: no annotation lines")
        graph = parse_gfl("\n".join(body), sentence)
        hours = float(header["hours"]) if "hours" in header else None
        records.append(
            GflRecord(sentence_id=sid, graph=graph, annotator=header.get("annotator"), hours=hours)
        )
        block.clear()

    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            flush()
        else:
            block.append((lineno, line))
    flush()
    return records


def merge_graphs(graphs, sentence):
    """Union several fragment graphs for one sentence into one."""
    parts = [serialize_gfl(g, sentence) for g in graphs]
    return parse_gfl("\n".join(parts), sentence)
