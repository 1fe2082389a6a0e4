"""Parser for the rendered term grammar (inverse of terms.render).

Grammar, one statement per call:

    statement  := rule "." | heads "." | term "?" | range "."
    rule       := heads " :- " body
    heads      := atom (" v " atom)*
    body       := literal (", " literal)*
    literal    := ["not "] atom | comparison
    atom       := frame | temporal | domain
    frame      := 'frame("' NAME '",[' rl ("," rl)* '])'
    rl         := 'rl("' ROLE '",' filler ')'
    comparison := filler "!=" filler | filler "<" filler
    range      := PRED "(" INT ".." INT ")"

Whitespace between tokens is accepted liberally on input; rendering is
canonical.
"""

from __future__ import annotations

from .terms import (
    ATOM_RE,
    VAR_RE,
    Comparison,
    Constant,
    DomainAtom,
    Literal,
    RangeFact,
    Rule,
    TemporalAtom,
    UlrTerm,
    Variable,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: str | None = None):
        detail = f"syntax error at offset {offset}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n":
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self, literal: str) -> bool:
        self.skip_ws()
        return self.text.startswith(literal, self.pos)

    def take(self, literal: str, expected: str | None = None) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise ParseError(
                f"found {self.text[self.pos:self.pos + 12]!r}",
                self.pos,
                expected or repr(literal),
            )
        self.pos += len(literal)

    def take_word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise ParseError("not a name", start, "identifier")
        return self.text[start:self.pos]

    def take_int(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            raise ParseError("not an integer", start, "integer")
        return int(self.text[start:self.pos])

    def take_string(self) -> str:
        self.take('"', "double-quoted string")
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] != '"':
            self.pos += 1
        if self.pos >= len(self.text):
            raise ParseError("unterminated string", start, '"')
        value = self.text[start:self.pos]
        self.pos += 1
        return value


def _parse_filler(s: _Scanner):
    s.skip_ws()
    if s.peek('"'):
        return Constant("quoted", s.take_string())
    ch = s.text[s.pos] if s.pos < len(s.text) else ""
    if ch.isdigit() or ch == "-":
        return Constant("int", str(s.take_int()))
    word = s.take_word()
    if VAR_RE.match(word):
        return Variable(word)
    if not ATOM_RE.match(word):
        raise ParseError(f"bad filler {word!r}", s.pos, "atom, variable, or integer")
    if s.peek("("):
        # structured filler like at_least(7)
        s.take("(")
        arg = s.take_int()
        s.take(")")
        return Constant("atom", word, arg)
    return Constant("atom", word)


def _parse_frame(s: _Scanner) -> UlrTerm:
    s.take("frame(")
    name = s.take_string()
    negated = name.endswith("_not")
    if negated:
        name = name[:-4]
    s.take(",")
    s.take("[")
    roles = []
    if not s.peek("]"):
        while True:
            s.take("rl(", 'rl("Role",Filler)')
            role = s.take_string()
            s.take(",")
            filler = _parse_filler(s)
            s.take(")")
            roles.append((role, filler))
            if s.peek(","):
                s.take(",")
                continue
            break
    s.take("]")
    s.take(")")
    return UlrTerm(name, tuple(roles), negated)


def _parse_atom(s: _Scanner):
    s.skip_ws()
    if s.peek("frame("):
        return _parse_frame(s)
    word_start = s.pos
    word = s.take_word()
    s.take("(")
    # range sugar pred(a..b) wins over any other unary reading
    s.skip_ws()
    mark = s.pos
    try:
        low = s.take_int()
        if s.peek(".."):
            s.take("..")
            high = s.take_int()
            s.take(")")
            return RangeFact(word, low, high)
    except ParseError:
        pass
    s.pos = mark
    if word in TemporalAtom.SHAPES:
        args = []
        while True:
            s.skip_ws()
            if s.peek("frame("):
                args.append(_parse_frame(s))
            else:
                args.append(_parse_filler(s))
            if s.peek(","):
                s.take(",")
                continue
            break
        s.take(")")
        return TemporalAtom(word, tuple(args))
    if not ATOM_RE.match(word):
        raise ParseError(f"bad predicate {word!r}", word_start, "lowercase predicate")
    arg = _parse_filler(s)
    s.take(")")
    return DomainAtom(word, arg)


def _parse_literal(s: _Scanner) -> Literal:
    s.skip_ws()
    naf = False
    if s.peek("not "):
        s.take("not ")
        naf = True
    # comparisons start with a filler, not a predicate-with-parens; try an
    # atom first and fall back when the next token is a comparison operator.
    mark = s.pos
    if not naf:
        probe = _Scanner(s.text)
        probe.pos = s.pos
        try:
            left = _parse_filler(probe)
            probe.skip_ws()
            if probe.text.startswith("!=", probe.pos) or probe.text.startswith("<", probe.pos):
                op = "!=" if probe.text.startswith("!=", probe.pos) else "<"
                probe.pos += len(op)
                right = _parse_filler(probe)
                s.pos = probe.pos
                return Literal(Comparison(op, left, right))
        except ParseError:
            s.pos = mark
    atom = _parse_atom(s)
    if isinstance(atom, RangeFact):
        raise ParseError("range sugar is only allowed as a fact", mark)
    return Literal(atom, naf)


def parse_statement(text: str):
    """Parse one statement: returns UlrTerm (query), Rule, or RangeFact.

    Facts come back as Rules with an empty body; a trailing `?` marks a
    query and yields the bare term.
    """
    s = _Scanner(text)
    s.skip_ws()
    start_atom = _parse_atom(s)
    if isinstance(start_atom, RangeFact):
        s.take(".")
        _expect_end(s)
        return start_atom
    if s.peek("?"):
        s.take("?")
        _expect_end(s)
        if isinstance(start_atom, (UlrTerm, TemporalAtom)):
            return start_atom
        raise ParseError("only frame/temporal queries are supported", s.pos)
    heads = [start_atom]
    while s.peek("v "):
        s.take("v ")
        heads.append(_parse_atom(s))
    body: list[Literal] = []
    if s.peek(":-"):
        s.take(":-")
        while True:
            body.append(_parse_literal(s))
            if s.peek(","):
                s.take(",")
                continue
            break
    s.take(".", "'.' or '?' terminator")
    _expect_end(s)
    return Rule(tuple(heads), tuple(body))


def _expect_end(s: _Scanner) -> None:
    if not s.eof():
        raise ParseError(f"trailing input {s.text[s.pos:s.pos + 12]!r}", s.pos, "end of statement")


def parse_term_text(text: str):
    """Public single-statement entry point; see parse_statement."""
    return parse_statement(text)


def parse_program_text(text: str) -> list:
    """Parse a whole program: statements separated by '.' terminators.

    Lines may hold several space-separated facts (as the domain-atom
    displays do); '%' starts a comment line.
    """
    statements = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        for piece in _split_statements(line):
            try:
                statements.append(parse_statement(piece))
            except ParseError as exc:
                raise ParseError(f"line {line_no}: {exc}", exc.offset) from exc
    return statements


def _split_statements(line: str) -> list[str]:
    """Split a line into statements on terminators outside quotes."""
    pieces = []
    depth = 0
    in_string = False
    start = 0
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch in ".?" and depth == 0:
                # ".." inside ranges is depth>0; a terminator ends a statement
                pieces.append(line[start:i + 1])
                start = i + 1
        i += 1
    rest = line[start:].strip()
    if rest:
        pieces.append(rest)
    return [p.strip() for p in pieces if p.strip()]
