"""CoNLL-U ingestion: dependency parses, factuality checks, tree paths.

Only ID, FORM, LEMMA, UPOS, HEAD, DEPREL are consumed; multiword-token
ranges and empty nodes are skipped with a diagnostic. No parsing of raw
text happens here or anywhere else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class IngestError(ValueError):
    """Malformed CoNLL-U input (bad head, cycle, non-integer fields)."""


@dataclass(frozen=True)
class Token:
    id: int  # 1-based
    form: str
    lemma: str
    upos: str
    head: int  # 0 = root
    deprel: str


@dataclass
class DepParse:
    tokens: list[Token]
    sentence_text: str = ""

    def __post_init__(self) -> None:
        self._children: dict[int, list[Token]] | None = None

    def token(self, tid: int) -> Token:
        return self.tokens[tid - 1]

    @property
    def root(self) -> Token:
        for t in self.tokens:
            if t.head == 0:
                return t
        raise IngestError("parse has no root")

    def children(self, tid: int) -> list[Token]:
        if self._children is None:
            kids: dict[int, list[Token]] = {}
            for t in self.tokens:
                kids.setdefault(t.head, []).append(t)
            self._children = kids
        return self._children.get(tid, [])

    def child_by_deprel(self, tid: int, deprel: str) -> list[Token]:
        return [t for t in self.children(tid) if t.deprel == deprel]

    def subtree_ids(self, tid: int) -> set[int]:
        out = {tid}
        stack = [tid]
        while stack:
            for child in self.children(stack.pop()):
                if child.id not in out:
                    out.add(child.id)
                    stack.append(child.id)
        return out

    def text(self) -> str:
        return self.sentence_text or " ".join(t.form for t in self.tokens)


FAILURE = None  # dep_path failure marker


def dep_path(parse: DepParse, from_id: int, to_id: int) -> list[str] | None:
    """Deprel labels along the downward path from `from_id` to `to_id`.

    Returns [] when the ids coincide and the failure marker (None) when
    `to_id` is not in the subtree of `from_id`; upward and lateral paths
    are deliberately not found.
    """
    if from_id == to_id:
        return []
    labels: list[str] = []
    current = to_id
    steps = 0
    while current != from_id:
        tok = parse.token(current)
        labels.append(tok.deprel)
        current = tok.head
        steps += 1
        if current == 0 or steps > len(parse.tokens):
            return FAILURE
    labels.reverse()
    return labels


def walk_path(parse: DepParse, start: int, labels: list[str]) -> list[Token]:
    """All tokens reachable from `start` by following the deprel labels."""
    frontier = [start]
    for label in labels:
        nxt: list[int] = []
        for tid in frontier:
            for child in parse.children(tid):
                if child.deprel == label:
                    nxt.append(child.id)
        frontier = nxt
        if not frontier:
            return []
    return [parse.token(t) for t in frontier]


def load_conllu(text: str, diagnostics: list[str] | None = None) -> list[DepParse]:
    """Parse CoNLL-U text into one DepParse per sentence block."""
    parses: list[DepParse] = []
    rows: list[tuple[int, list[str]]] = []
    sentence_text = ""
    line_no = 0

    def flush() -> None:
        nonlocal rows, sentence_text
        if rows:
            parses.append(_build_sentence(rows, sentence_text, diagnostics))
        rows = []
        sentence_text = ""

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            comment = line[1:].strip()
            if comment.startswith("text") and "=" in comment:
                sentence_text = comment.split("=", 1)[1].strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise IngestError(f"line {line_no}: expected 10 tab-separated columns")
        tid = cols[0]
        if "-" in tid or "." in tid:
            if diagnostics is not None:
                diagnostics.append(f"line {line_no}: skipped multiword/empty node {tid}")
            continue
        rows.append((line_no, cols))
    flush()
    return parses


def _build_sentence(rows, sentence_text: str, diagnostics) -> DepParse:
    tokens: list[Token] = []
    first_line = rows[0][0]
    for line_no, cols in rows:
        try:
            tid = int(cols[0])
            head = int(cols[6])
        except ValueError as exc:
            raise IngestError(f"line {line_no}: non-integer id or head") from exc
        tokens.append(Token(tid, cols[1], cols[2], cols[3], head, cols[7]))
    for i, tok in enumerate(tokens, start=1):
        if tok.id != i:
            raise IngestError(
                f"sentence at line {first_line}: token ids not contiguous from 1"
            )
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    if len(roots) != 1:
        raise IngestError(
            f"sentence at line {first_line}: expected exactly one root, got {len(roots)}"
        )
    for tok in tokens:
        if not (0 <= tok.head <= n):
            raise IngestError(
                f"sentence at line {first_line}: dangling head {tok.head} on token {tok.id}"
            )
    # cycle check: every token must reach the root
    for tok in tokens:
        seen = set()
        cur = tok.head
        while cur != 0:
            if cur in seen:
                raise IngestError(
                    f"sentence at line {first_line}: cyclic head chain at token {tok.id}"
                )
            seen.add(cur)
            cur = tokens[cur - 1].head
    return DepParse(tokens, sentence_text)


def serialize_columns(parse: DepParse) -> str:
    """Re-emit the 6 consumed columns (others as '_'), one token per line."""
    lines = []
    for t in parse.tokens:
        lines.append(
            "\t".join(
                [str(t.id), t.form, t.lemma, t.upos, "_", "_", str(t.head), t.deprel, "_", "_"]
            )
        )
    return "\n".join(lines)


COPULAR_ROOT_TAGS = {"NOUN", "PROPN", "ADJ", "ADV", "NUM", "PRON"}


def validate_factual(parse: DepParse) -> list[str]:
    """Return violations; empty list means the sentence is acceptable.

    Minimal three-property check: declarative root (finite verb or copular
    construction), subject presence for verbal roots, no interjection root.
    Advisory notes (relative clauses) are prefixed "advisory:".
    """
    violations: list[str] = []
    root = parse.root
    if root.upos == "INTJ":
        violations.append(f"no factual root: interjection {root.form!r}")
        return violations
    if root.upos == "VERB":
        has_subj = any(
            t.deprel in ("nsubj", "nsubj:pass") for t in parse.children(root.id)
        )
        if not has_subj:
            violations.append(f"imperative: verbal root {root.form!r} has no subject")
    elif root.upos in COPULAR_ROOT_TAGS:
        has_cop = any(t.deprel in ("cop", "aux") for t in parse.children(root.id))
        if not has_cop:
            violations.append(
                f"no factual root: {root.form!r} ({root.upos}) lacks a copula"
            )
    else:
        violations.append(f"no factual root: {root.form!r} ({root.upos})")
    if any(t.deprel == "acl:relcl" for t in parse.tokens):
        violations.append("advisory: relative clause present; not decomposed")
    return violations


def is_factual(parse: DepParse) -> bool:
    return not [v for v in validate_factual(parse) if not v.startswith("advisory:")]


@dataclass
class ParseLookup:
    """Sentence-text -> DepParse index over one or more CoNLL-U files."""

    by_text: dict[str, DepParse] = field(default_factory=dict)

    @staticmethod
    def canonical(sentence: str) -> str:
        text = " ".join(sentence.split())
        return text.rstrip(".?! ").strip()

    def add_conllu(self, text: str, diagnostics: list[str] | None = None) -> None:
        for parse in load_conllu(text, diagnostics):
            self.by_text[self.canonical(parse.text())] = parse

    def get(self, sentence: str) -> DepParse | None:
        return self.by_text.get(self.canonical(sentence))
