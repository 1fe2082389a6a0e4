"""Logical term language: frame terms, literals, rules, programs.

Everything here is an immutable value; rendering produces the exact
textual syntax consumed by :mod:`framelog.parsing` and the solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
TOKEN_CHARS_RE = re.compile(r"[A-Za-z0-9-]+\Z")

PROPER_TAGS = {"PROPN"}
NUMERAL_TAGS = {"NUM"}


class TermError(ValueError):
    """Raised for ill-formed terms and constants."""


@dataclass(frozen=True)
class Constant:
    """A ground filler: quoted proper name, plain atom, or integer.

    Structured fillers such as at_least(7) are plain-atom functors with
    an integer argument; `arg` is None everywhere else.
    """

    kind: str  # "quoted" | "atom" | "int"
    text: str
    arg: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("quoted", "atom", "int"):
            raise TermError(f"unknown constant kind {self.kind!r}")
        if self.kind == "atom" and not ATOM_RE.match(self.text):
            raise TermError(f"not a valid plain atom: {self.text!r}")
        if self.kind == "int" and not re.match(r"-?[0-9]+\Z", self.text):
            raise TermError(f"not a valid integer literal: {self.text!r}")
        if self.arg is not None and self.kind != "atom":
            raise TermError("only atom functors may carry an argument")

    def render(self) -> str:
        if self.kind == "quoted":
            return f'"{self.text}"'
        if self.arg is not None:
            return f"{self.text}({self.arg})"
        return self.text

    @property
    def value(self) -> str:
        """Display form without quoting, for answer comparison."""
        if self.arg is not None:
            return f"{self.text}({self.arg})"
        return self.text


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not VAR_RE.match(self.name):
            raise TermError(f"not a valid variable name: {self.name!r}")

    def render(self) -> str:
        return self.name


Filler = Constant | Variable


def normalize_constant(token_form: str, pos_tag: str) -> Constant:
    """Map a token (form or lemma) plus its UPOS tag to a Constant.

    Proper nouns keep their capitalization and render quoted; numerals
    become integers; everything else becomes a lowercased plain atom.
    Hyphens are folded to underscores so atoms stay in the term charset.
    """
    if not token_form:
        raise TermError("empty token form")
    if pos_tag in NUMERAL_TAGS or re.match(r"-?[0-9]+\Z", token_form):
        if not re.match(r"-?[0-9]+\Z", token_form):
            raise TermError(f"numeral tag on non-numeric token {token_form!r}")
        return Constant("int", token_form)
    if not TOKEN_CHARS_RE.match(token_form):
        raise TermError(
            f"token {token_form!r} contains characters outside letters/digits/hyphen"
        )
    if pos_tag in PROPER_TAGS:
        return Constant("quoted", token_form)
    text = token_form.lower().replace("-", "_")
    if not ATOM_RE.match(text):
        raise TermError(f"cannot form a plain atom from {token_form!r}")
    return Constant("atom", text)


@dataclass(frozen=True)
class UlrTerm:
    """A frame instance: frame("Name",[rl("Role",Filler),...]).

    `negated` renders as the `_not` suffix on the frame name; role names
    are unique and keep the order they were given (schema order once a
    term has gone through composition).
    """

    frame_name: str
    roles: tuple[tuple[str, Filler], ...]
    negated: bool = False

    def __post_init__(self) -> None:
        seen = set()
        for role, _ in self.roles:
            if role in seen:
                raise TermError(f"duplicate role {role!r} in frame {self.frame_name!r}")
            seen.add(role)
        if self.frame_name.endswith("_not"):
            raise TermError("use negated=True instead of a literal _not suffix")

    @property
    def rendered_name(self) -> str:
        return self.frame_name + "_not" if self.negated else self.frame_name

    def render(self) -> str:
        inner = ",".join(f'rl("{r}",{f.render()})' for r, f in self.roles)
        return f'frame("{self.rendered_name}",[{inner}])'

    def role_map(self) -> dict[str, Filler]:
        return dict(self.roles)

    def variables(self) -> set[str]:
        return {f.name for _, f in self.roles if isinstance(f, Variable)}

    def substitute(self, binding: dict[str, Filler]) -> "UlrTerm":
        roles = tuple(
            (r, binding.get(f.name, f) if isinstance(f, Variable) else f)
            for r, f in self.roles
        )
        return UlrTerm(self.frame_name, roles, self.negated)

    def is_ground(self) -> bool:
        return not self.variables()


@dataclass(frozen=True)
class DomainAtom:
    """Unary domain-predicate atom, e.g. doctor("Daniel")."""

    predicate: str
    argument: Filler

    def __post_init__(self) -> None:
        if not ATOM_RE.match(self.predicate):
            raise TermError(f"bad domain predicate {self.predicate!r}")

    def render(self) -> str:
        return f"{self.predicate}({self.argument.render()})"

    def variables(self) -> set[str]:
        return {self.argument.name} if isinstance(self.argument, Variable) else set()

    def substitute(self, binding: dict[str, Filler]) -> "DomainAtom":
        arg = self.argument
        if isinstance(arg, Variable):
            arg = binding.get(arg.name, arg)
        return DomainAtom(self.predicate, arg)

    def is_ground(self) -> bool:
        return not self.variables()


@dataclass(frozen=True)
class Comparison:
    """`!=` or `<` between two fillers; `<` is integer-only."""

    op: str  # "!=" | "<"
    left: Filler
    right: Filler

    def __post_init__(self) -> None:
        if self.op not in ("!=", "<"):
            raise TermError(f"unsupported comparison {self.op!r}")

    def render(self) -> str:
        if self.op == "<":
            return f"{self.left.render()} < {self.right.render()}"
        return f"{self.left.render()}!={self.right.render()}"

    def variables(self) -> set[str]:
        out = set()
        for f in (self.left, self.right):
            if isinstance(f, Variable):
                out.add(f.name)
        return out

    def substitute(self, binding: dict[str, Filler]) -> "Comparison":
        left = binding.get(self.left.name, self.left) if isinstance(self.left, Variable) else self.left
        right = binding.get(self.right.name, self.right) if isinstance(self.right, Variable) else self.right
        return Comparison(self.op, left, right)

    def holds(self) -> bool:
        if isinstance(self.left, Variable) or isinstance(self.right, Variable):
            raise TermError("cannot evaluate a non-ground comparison")
        if self.op == "!=":
            return self.left != self.right
        if self.left.kind != "int" or self.right.kind != "int":
            raise TermError("< is only defined over integers")
        return int(self.left.text) < int(self.right.text)


@dataclass(frozen=True)
class TemporalAtom:
    """holdsAt/happensAt/initiates/terminates/stoppedIn/observable/timestamp.

    Arguments are UlrTerms or fillers depending on the functor; timestamps
    are integer constants or variables.
    """

    functor: str
    args: tuple

    SHAPES = {
        "holdsAt": 2,
        "happensAt": 2,
        "initiates": 2,
        "terminates": 2,
        "stoppedIn": 3,
        "observable": 1,
        "timestamp": 1,
    }

    def __post_init__(self) -> None:
        arity = self.SHAPES.get(self.functor)
        if arity is None:
            raise TermError(f"unknown temporal functor {self.functor!r}")
        if len(self.args) != arity:
            raise TermError(f"{self.functor}/{arity} got {len(self.args)} args")

    def render(self) -> str:
        rendered = ",".join(a.render() for a in self.args)
        return f"{self.functor}({rendered})"

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.args:
            if isinstance(a, Variable):
                out.add(a.name)
            elif isinstance(a, (UlrTerm, TemporalAtom)):
                out |= a.variables()
        return out

    def substitute(self, binding: dict[str, Filler]) -> "TemporalAtom":
        args = []
        for a in self.args:
            if isinstance(a, Variable):
                args.append(binding.get(a.name, a))
            elif isinstance(a, (UlrTerm, TemporalAtom)):
                args.append(a.substitute(binding))
            else:
                args.append(a)
        return TemporalAtom(self.functor, tuple(args))

    def is_ground(self) -> bool:
        return not self.variables()


Atom = UlrTerm | DomainAtom | TemporalAtom


@dataclass(frozen=True)
class Literal:
    """A body literal: positive or negation-as-failure over an atom,
    or a comparison (always positive)."""

    atom: Atom | Comparison
    naf: bool = False

    def __post_init__(self) -> None:
        if self.naf and isinstance(self.atom, Comparison):
            raise TermError("naf over comparisons is not supported")

    def render(self) -> str:
        text = self.atom.render()
        return f"not {text}" if self.naf else text

    def variables(self) -> set[str]:
        return self.atom.variables()

    def substitute(self, binding: dict[str, Filler]) -> "Literal":
        return Literal(self.atom.substitute(binding), self.naf)


@dataclass(frozen=True)
class Rule:
    """head1 v ... v headm :- body1, ..., bodyn.

    Empty body renders as a (possibly disjunctive) fact; an empty head is
    an integrity constraint (internal use only, never produced from the
    surface language).
    """

    head: tuple[Atom, ...]
    body: tuple[Literal, ...] = ()

    def render(self) -> str:
        head_text = " v ".join(a.render() for a in self.head)
        if not self.body:
            return f"{head_text}."
        body_text = ", ".join(lit.render() for lit in self.body)
        if not self.head:
            return f":- {body_text}."
        return f"{head_text} :- {body_text}."

    def is_fact(self) -> bool:
        return not self.body and len(self.head) == 1

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.head:
            out |= a.variables()
        for lit in self.body:
            out |= lit.variables()
        return out

    def positive_body_variables(self) -> set[str]:
        out: set[str] = set()
        for lit in self.body:
            if not lit.naf and not isinstance(lit.atom, Comparison):
                out |= lit.variables()
        return out

    def unsafe_variables(self) -> list[str]:
        """Head, naf, and comparison variables with no positive occurrence."""
        bound = self.positive_body_variables()
        unsafe: list[str] = []
        seen: set[str] = set()

        def check(names: set[str]) -> None:
            for name in sorted(names):
                if name not in bound and name not in seen:
                    seen.add(name)
                    unsafe.append(name)

        for a in self.head:
            check(a.variables())
        for lit in self.body:
            if lit.naf or isinstance(lit.atom, Comparison):
                check(lit.variables())
        return unsafe

    def substitute(self, binding: dict[str, Filler]) -> "Rule":
        return Rule(
            tuple(a.substitute(binding) for a in self.head),
            tuple(lit.substitute(binding) for lit in self.body),
        )

    def is_ground(self) -> bool:
        return not self.variables()


@dataclass(frozen=True)
class RangeFact:
    """Sugar `pred(a..b).` that expands to unary facts pred(a)..pred(b)."""

    predicate: str
    low: int
    high: int

    def render(self) -> str:
        return f"{self.predicate}({self.low}..{self.high})."

    def expand(self) -> list[Rule]:
        return [
            Rule((DomainAtom(self.predicate, Constant("int", str(i))),))
            for i in range(self.low, self.high + 1)
        ]


@dataclass
class Program:
    """A flat rule list; facts are rules with an empty body.

    Statements are deduplicated structurally, preserving first-seen order,
    so re-asserting a fact is a no-op.
    """

    rules: list[Rule] = field(default_factory=list)
    _seen: set[Rule] = field(default_factory=set, repr=False)

    def add(self, rule: Rule | RangeFact) -> bool:
        if isinstance(rule, RangeFact):
            added = False
            for fact in rule.expand():
                added = self.add(fact) or added
            return added
        if rule in self._seen:
            return False
        self._seen.add(rule)
        self.rules.append(rule)
        return True

    def extend(self, rules) -> None:
        for r in rules:
            self.add(r)

    def render(self) -> str:
        return "\n".join(r.render() for r in self.rules)

    def copy(self) -> "Program":
        p = Program()
        p.extend(self.rules)
        return p


def render(obj) -> str:
    """Render any term-language value to its canonical text."""
    return obj.render()
