"""Deployment stage: trigger valence patterns on parsed sentences, fill
roles, detect negation and homogeneous and/or coordination, and compose
frame facts plus domain atoms."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby

from .conllu import DepParse, Token, is_factual, validate_factual, walk_path
from .lvp import LU_PATH_LABEL, Lvp, LvpStore
from .schema import SchemaSet
from .terms import Constant, DomainAtom, Filler, Rule, TermError, UlrTerm, Variable, normalize_constant


class ExtractError(ValueError):
    pass


WH_LEMMAS = {"who": "Who", "what": "What", "where": "Where"}
NEGATION_LEMMAS = {"not", "no"}
UNIT_NOUNS = {"day", "week", "month", "year", "hour", "minute"}
MODIFIER_DEPRELS = ("compound", "amod")


@dataclass(frozen=True)
class FrameParse:
    """One triggered frame with its extracted fillers.

    `fillers` keeps extraction (pattern) order; composition reorders roles
    into schema order. Score components order candidate selection.
    """

    frame: str
    lu_token: int
    fillers: tuple[tuple[str, int, Filler], ...]  # (role, token id, filler)
    negated: bool
    required_filled: int
    total_filled: int
    path_length: int

    def score(self) -> tuple[int, int, int]:
        return (self.required_filled, self.total_filled, self.path_length)

    def signature(self):
        return (self.frame, self.negated, tuple((r, f) for r, _, f in self.fillers))


@dataclass
class SentenceGroup:
    """All frame parses of one sentence plus its connective."""

    parses: list[FrameParse]
    connective: str | None = None  # None | "and" | "or"
    diagnostics: list[str] = None

    def __post_init__(self) -> None:
        if self.diagnostics is None:
            self.diagnostics = []


def variable_for_token(parse: DepParse, token: Token, query_mode: bool) -> Variable | None:
    """Typed `$var` tokens and Wh-words become logic variables."""
    if token.form.startswith("$"):
        base = token.form[1:]
        if not base:
            return None
        return Variable(base[0].upper() + base[1:])
    if token.lemma.lower() in WH_LEMMAS:
        return Variable(WH_LEMMAS[token.lemma.lower()])
    for child in parse.children(token.id):
        if child.deprel == "det" and child.lemma.lower() in ("what", "which"):
            return Variable("What")
    if query_mode:
        for child in parse.children(token.id):
            if child.deprel == "amod" and child.lemma.lower() == "many":
                return Variable("What")
    return None


def structured_filler(parse: DepParse, token: Token) -> Constant | None:
    """Duration-style fillers: "for 2 days" -> 2, "at least 7 days" -> at_least(7)."""
    if token.lemma.lower() not in UNIT_NOUNS:
        return None
    nums = [t for t in parse.children(token.id) if t.deprel == "nummod"]
    if len(nums) != 1:
        return None
    num = nums[0]
    bound = None
    for child in parse.children(num.id):
        if child.deprel == "advmod" and child.lemma.lower() in ("least", "most"):
            bound = "at_least" if child.lemma.lower() == "least" else "at_most"
    try:
        value = int(num.form)
    except ValueError:
        return None
    if bound:
        return Constant("atom", bound, value)
    return Constant("int", str(value))


def token_filler(
    parse: DepParse,
    token: Token,
    domain: str,
    schemas: SchemaSet,
    query_mode: bool,
) -> Filler | None:
    """Normalize a matched token into a filler, applying the generic-noun
    rescue: a bare type-word descends to its single modifier."""
    var = variable_for_token(parse, token, query_mode)
    if var is not None:
        return var
    structured = structured_filler(parse, token)
    if structured is not None:
        return structured
    lemma = token.lemma.lower()
    if lemma == domain or lemma in schemas.generic_nouns:
        replacement = _single_modifier(parse, token)
        if replacement is None:
            return None
        return token_filler(parse, replacement, domain, schemas, query_mode)
    form = token.form if token.upos in ("PROPN", "NUM") else token.lemma
    try:
        return normalize_constant(form, token.upos)
    except TermError:
        return None


def _single_modifier(parse: DepParse, token: Token) -> Token | None:
    for deprel in MODIFIER_DEPRELS:
        mods = [t for t in parse.children(token.id) if t.deprel == deprel]
        if len(mods) == 1:
            return mods[0]
        if len(mods) > 1:
            return None
    return None


def detect_negation(parse: DepParse, lu_id: int) -> bool:
    """`not`/`no` on the LU or on its auxiliary/copula marks the frame negated."""
    sites = [lu_id]
    for child in parse.children(lu_id):
        if child.deprel in ("aux", "aux:pass", "cop"):
            sites.append(child.id)
    for site in sites:
        for child in parse.children(site):
            if child.deprel in ("advmod", "det") and child.lemma.lower() in NEGATION_LEMMAS:
                return True
    return False


def trigger_lvps(parse: DepParse, store: LvpStore) -> list[tuple[Lvp, int]]:
    """Every token whose lemma (or synonym) keys the store triggers its LVPs."""
    triggered = []
    for token in parse.tokens:
        for lvp in store.lookup(token.lemma):
            triggered.append((lvp, token.id))
    return triggered


def apply_lvp(
    parse: DepParse,
    lvp: Lvp,
    lu_token: int,
    schemas: SchemaSet,
    query_mode: bool = False,
) -> FrameParse | None:
    """Walk each pattern path from the LU; fail if a required role stays empty."""
    fillers: list[tuple[str, int, Filler]] = []
    required_filled = 0
    path_length = 0
    for pattern in lvp.patterns:
        if pattern.path == (LU_PATH_LABEL,):
            matches = [parse.token(lu_token)]
        else:
            matches = walk_path(parse, lu_token, list(pattern.path))
        filler = None
        token = None
        for candidate in sorted(matches, key=lambda t: t.id):
            domain = schemas.domain_of(lvp.frame, pattern.role)
            filler = token_filler(parse, candidate, domain, schemas, query_mode)
            if filler is not None:
                token = candidate
                break
        if filler is None:
            if pattern.required:
                return None
            continue
        fillers.append((pattern.role, token.id, filler))
        if pattern.required:
            required_filled += 1
        path_length += len(pattern.path)
    return FrameParse(
        frame=lvp.frame,
        lu_token=lu_token,
        fillers=tuple(fillers),
        negated=detect_negation(parse, lu_token),
        required_filled=required_filled,
        total_filled=len(fillers),
        path_length=path_length,
    )


def select_parses(candidates: list[FrameParse]) -> list[FrameParse]:
    """Keep score-maximal candidates; ties all survive, deduplicated, in
    deterministic (frame name, LU token) order."""
    if not candidates:
        return []
    best = max(c.score() for c in candidates)
    kept = [c for c in candidates if c.score() == best]
    kept.sort(key=lambda c: (c.frame, c.lu_token))
    seen = set()
    unique = []
    for c in kept:
        sig = c.signature()
        if sig not in seen:
            seen.add(sig)
            unique.append(c)
    return unique


# --- coordination splitting -------------------------------------------------

CORE_COPY_DEPRELS = ("nsubj", "nsubj:pass", "obj", "iobj", "obl")


def _first_conj_group(parse: DepParse) -> tuple[Token, list[Token]] | None:
    by_head: dict[int, list[Token]] = {}
    for t in parse.tokens:
        if t.deprel == "conj":
            by_head.setdefault(t.head, []).append(t)
    if not by_head:
        return None
    head_id = min(by_head)
    return parse.token(head_id), sorted(by_head[head_id], key=lambda t: t.id)


def _group_connective(parse: DepParse, conjuncts: list[Token]) -> str | None:
    for c in conjuncts:
        for child in parse.children(c.id):
            if child.deprel == "cc" and child.lemma.lower() in ("and", "or"):
                return child.lemma.lower()
    return None


def _rebuild(parse: DepParse, keep: set[int], rehead: dict[int, tuple[int, str]]) -> DepParse:
    """Construct a variant parse from kept token ids, renumbering contiguously."""
    kept_sorted = sorted(keep)
    remap = {old: new for new, old in enumerate(kept_sorted, start=1)}
    tokens = []
    for old in kept_sorted:
        t = parse.token(old)
        head, deprel = rehead.get(old, (t.head, t.deprel))
        new_head = 0 if head == 0 else remap[head]
        tokens.append(Token(remap[old], t.form, t.lemma, t.upos, new_head, deprel))
    return DepParse(tokens, parse.sentence_text)


def split_coordination(parse: DepParse) -> tuple[list[DepParse], str | None]:
    """Expand homogeneous coordination into one variant parse per conjunct.

    Recursion handles several groups; a mixture of and/or anywhere in the
    sentence raises ExtractError per the homogeneity restriction.
    """
    group = _first_conj_group(parse)
    if group is None:
        return [parse], None
    head, conjuncts = group
    connective = _group_connective(parse, conjuncts)
    if connective is None:
        raise ExtractError(
            f"coordination at token {head.id} has no and/or coordinator"
        )
    all_ids = set(range(1, len(parse.tokens) + 1))
    conj_subtrees = {c.id: parse.subtree_ids(c.id) for c in conjuncts}
    variants: list[DepParse] = []

    preconj = {
        t.id
        for t in parse.children(head.id)
        if t.deprel == "cc:preconj"
        or (t.deprel == "advmod" and t.lemma.lower() in ("either", "both"))
    }

    # variant keeping the first conjunct: drop every conj subtree
    drop = set(preconj)
    for ids in conj_subtrees.values():
        drop |= ids
    variants.append(_rebuild(parse, all_ids - drop, {}))

    # variants promoting each later conjunct into the head position
    head_subtree = parse.subtree_ids(head.id)
    for c in conjuncts:
        keep = (all_ids - head_subtree - preconj) | conj_subtrees[c.id]
        # the coordinator itself sits inside the conjunct's subtree
        keep -= {t.id for t in parse.children(c.id) if t.deprel == "cc"}
        rehead = {c.id: (head.head, head.deprel)}
        # carry over the head's core arguments the conjunct lacks
        child_deprels = {t.deprel for t in parse.children(c.id)}
        for dep in CORE_COPY_DEPRELS:
            if dep in child_deprels:
                continue
            for shared in parse.children(head.id):
                if shared.deprel == dep and shared.id not in conj_subtrees[c.id]:
                    sub = parse.subtree_ids(shared.id)
                    keep |= sub
                    rehead[shared.id] = (c.id, dep)
                    break
        variants.append(_rebuild(parse, keep, rehead))

    expanded: list[DepParse] = []
    for variant in variants:
        subvariants, sub_connective = split_coordination(variant)
        if sub_connective is not None and sub_connective != connective:
            raise ExtractError(
                "mixture of conjunction and disjunction within a single sentence"
            )
        expanded.extend(subvariants)
    return expanded, connective


# --- sentence-level extraction ----------------------------------------------


def extract_sentence(
    parse: DepParse,
    store: LvpStore,
    schemas: SchemaSet,
    query_mode: bool = False,
    check_factual: bool = True,
) -> SentenceGroup:
    diagnostics: list[str] = []
    if check_factual:
        for violation in validate_factual(parse):
            if violation.startswith("advisory:"):
                diagnostics.append(f"{parse.text()}: {violation}")
            else:
                raise ExtractError(f"non-factual sentence {parse.text()!r}: {violation}")
    variants, connective = split_coordination(parse)
    parses: list[FrameParse] = []
    for variant in variants:
        candidates = [
            fp
            for lvp, lu in trigger_lvps(variant, store)
            for fp in [apply_lvp(variant, lvp, lu, schemas, query_mode)]
            if fp is not None
        ]
        selected = select_parses(candidates)
        if not selected:
            diagnostics.append(f"no frame recognized: {variant.text()!r}")
        parses.extend(selected)
    connective_name = {"and": "conjunction", "or": "disjunction", None: None}[connective]
    return SentenceGroup(parses, connective_name, diagnostics)


def frame_parse_term(fp: FrameParse, schemas: SchemaSet) -> UlrTerm:
    term = UlrTerm(fp.frame, tuple((r, f) for r, _, f in fp.fillers), fp.negated)
    return schemas.sort_roles(term)


def compose_ulr(group: SentenceGroup, schemas: SchemaSet) -> tuple[list[Rule], list[DomainAtom]]:
    """Conjunction -> one fact per parse; disjunction -> one disjunctive fact.

    Domain atoms are emitted per (role domain, constant filler) pair in
    schema role order, deduplicated across the group.
    """
    if not group.parses:
        return [], []
    terms = [frame_parse_term(fp, schemas) for fp in group.parses]
    atoms: list[DomainAtom] = []
    seen = set()
    for term in terms:
        for role, filler in term.roles:
            if isinstance(filler, Constant):
                atom = DomainAtom(schemas.domain_of(term.frame_name, role), filler)
                if atom not in seen:
                    seen.add(atom)
                    atoms.append(atom)
    if group.connective == "disjunction":
        if len(terms) < 2:
            group.diagnostics.append(
                "degenerate disjunction (single parse); emitted as a plain fact"
            )
            return [Rule((terms[0],))], atoms
        return [Rule(tuple(terms))], atoms
    return [Rule((t,)) for t in terms], atoms
