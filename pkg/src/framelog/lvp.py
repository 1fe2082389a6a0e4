"""Valence-pattern learning: annotated training sentences plus their
dependency parses yield per-lexical-unit extraction recipes.

Training file format, one term per line (a companion CoNLL-U file holds
the parses in the same order):

    train("Mary buys a car","Commerce_buy","LU"=2,[purchase],
          ["Buyer"=1+required,"Goods"=4+required]).

The reserved path label `lu` marks a role filled by the lexical unit
token itself (copular predicates).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .conllu import DepParse, dep_path
from .schema import SchemaSet

LU_PATH_LABEL = "lu"


class LvpError(ValueError):
    pass


@dataclass(frozen=True)
class RoleSpecAnn:
    role: str
    token_index: int
    required: bool


@dataclass(frozen=True)
class TrainingAnnotation:
    sentence: str
    frame: str
    lu_index: int
    lu_synonyms: tuple[str, ...]
    role_specs: tuple[RoleSpecAnn, ...]


@dataclass(frozen=True)
class Pattern:
    role: str
    path: tuple[str, ...]
    required: bool

    def render(self) -> str:
        flag = "required" if self.required else "optional"
        inner = ",".join(self.path)
        return f'pattern("{self.role}",[{inner}],{flag})'


@dataclass(frozen=True)
class Lvp:
    lu_lemma: str
    frame: str
    patterns: tuple[Pattern, ...]

    def render(self) -> str:
        inner = ",".join(p.render() for p in self.patterns)
        return f'lvp({self.lu_lemma},"{self.frame}",[{inner}]).'


@dataclass
class LvpStore:
    """Multimap lemma -> LVPs; synonym lookups resolve to the same LVPs."""

    entries: list[Lvp] = field(default_factory=list)
    synonyms: dict[str, str] = field(default_factory=dict)  # syn -> lu_lemma

    def add(self, lvp: Lvp, synonyms=()) -> None:
        if lvp not in self.entries:
            self.entries.append(lvp)
        for syn in synonyms:
            self.synonyms[syn] = lvp.lu_lemma

    def lookup(self, lemma: str) -> list[Lvp]:
        keys = {lemma}
        if lemma in self.synonyms:
            keys.add(self.synonyms[lemma])
        return [e for e in self.entries if e.lu_lemma in keys]

    def lemmas(self) -> set[str]:
        return {e.lu_lemma for e in self.entries} | set(self.synonyms)


def learn_lvp(ann: TrainingAnnotation, parse: DepParse) -> Lvp:
    """Synthesize one LVP from an annotation and its sentence's parse."""
    n = len(parse.tokens)
    if not (1 <= ann.lu_index <= n):
        raise LvpError(f"LU index {ann.lu_index} outside sentence of {n} tokens")
    seen_roles = set()
    patterns = []
    for spec in ann.role_specs:
        if spec.role in seen_roles:
            raise LvpError(f"duplicate role spec {spec.role!r}")
        seen_roles.add(spec.role)
        if not (1 <= spec.token_index <= n):
            raise LvpError(f"role {spec.role!r}: token index {spec.token_index} invalid")
        if spec.token_index == ann.lu_index:
            patterns.append(Pattern(spec.role, (LU_PATH_LABEL,), spec.required))
            continue
        path = dep_path(parse, ann.lu_index, spec.token_index)
        if path is None:
            raise LvpError(
                f"role {spec.role!r}: token {spec.token_index} is not reachable "
                f"downward from the LU"
            )
        patterns.append(Pattern(spec.role, tuple(path), spec.required))
    lu_lemma = parse.token(ann.lu_index).lemma
    return Lvp(lu_lemma, ann.frame, tuple(patterns))


TRAIN_RE = re.compile(
    r'train\(\s*"(?P<sentence>[^"]*)"\s*,\s*"(?P<frame>[^"]*)"\s*,\s*'
    r'"LU"\s*=\s*(?P<lu>\d+)\s*,\s*\[(?P<syns>[^\]]*)\]\s*,\s*'
    r"\[(?P<roles>.*)\]\s*\)\s*\.\s*$"
)
ROLE_RE = re.compile(r'"(?P<role>[^"]+)"\s*=\s*(?P<idx>\d+)\s*\+\s*(?P<flag>required|optional)')


def parse_training_line(line: str) -> TrainingAnnotation:
    m = TRAIN_RE.match(line.strip())
    if not m:
        raise LvpError(f"malformed training line: {line.strip()!r}")
    syns = tuple(s.strip() for s in m.group("syns").split(",") if s.strip())
    roles = tuple(
        RoleSpecAnn(rm.group("role"), int(rm.group("idx")), rm.group("flag") == "required")
        for rm in ROLE_RE.finditer(m.group("roles"))
    )
    return TrainingAnnotation(m.group("sentence"), m.group("frame"), int(m.group("lu")), syns, roles)


def parse_training_file(text: str) -> list[TrainingAnnotation]:
    annotations = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        try:
            annotations.append(parse_training_line(line))
        except LvpError as exc:
            raise LvpError(f"line {line_no}: {exc}") from exc
    return annotations


def learn_store(
    annotations: list[TrainingAnnotation],
    parses: list[DepParse],
    schemas: SchemaSet | None = None,
) -> LvpStore:
    if len(annotations) != len(parses):
        raise LvpError(
            f"{len(annotations)} annotations but {len(parses)} parses; "
            "the companion CoNLL-U file must match line for line"
        )
    store = LvpStore()
    for ann, parse in zip(annotations, parses):
        if schemas is not None:
            frame = schemas.frame(ann.frame)
            for spec in ann.role_specs:
                frame.role(spec.role)  # raises on unknown role
        store.add(learn_lvp(ann, parse), ann.lu_synonyms)
    return store


def save_store(store: LvpStore) -> str:
    """Line-oriented: lvp(...) terms in insertion order, then synonyms."""
    lines = [lvp.render() for lvp in store.entries]
    for syn in sorted(store.synonyms):
        lines.append(f"synonym({store.synonyms[syn]},{syn}).")
    return "\n".join(lines) + ("\n" if lines else "")


LVP_RE = re.compile(r'lvp\((?P<lu>[a-z][A-Za-z0-9_]*),"(?P<frame>[^"]+)",\[(?P<pats>.*)\]\)\.\s*$')
PATTERN_RE = re.compile(r'pattern\("(?P<role>[^"]+)",\[(?P<path>[^\]]*)\],(?P<flag>required|optional)\)')
SYN_RE = re.compile(r"synonym\((?P<lu>[a-z][A-Za-z0-9_]*),(?P<syn>[A-Za-z0-9_$]+)\)\.\s*$")


def load_store(text: str) -> LvpStore:
    store = LvpStore()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        m = LVP_RE.match(line)
        if m:
            patterns = tuple(
                Pattern(
                    pm.group("role"),
                    tuple(p.strip() for p in pm.group("path").split(",") if p.strip()),
                    pm.group("flag") == "required",
                )
                for pm in PATTERN_RE.finditer(m.group("pats"))
            )
            store.add(Lvp(m.group("lu"), m.group("frame"), patterns))
            continue
        sm = SYN_RE.match(line)
        if sm:
            store.synonyms[sm.group("syn")] = sm.group("lu")
            continue
        raise LvpError(f"line {line_no}: malformed store line: {line!r}")
    return store
