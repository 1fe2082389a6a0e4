"""Restricted if-then rule and query compilation.

Surface form, one statement per line:

    If P1, P2, ..., and Pn, then C1, C2, ..., or Cm.

Premise chunks may carry a "not provable" prefix (negation as failure);
`$name` tokens are explicitly typed variables; queries end with `?`.
Every chunk must have a dependency parse in the supplied lookup.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from .conllu import ParseLookup
from .extract import ExtractError, FrameParse, SentenceGroup, extract_sentence, frame_parse_term
from .lvp import LvpStore
from .schema import SchemaSet
from .terms import Comparison, DomainAtom, Literal, Rule, UlrTerm, Variable


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSource:
    premises: tuple[str, ...]
    conclusions: tuple[str, ...]
    raw: str


@dataclass(frozen=True)
class QuerySource:
    text: str


NAF_PREFIX = "not provable "
RULE_RE = re.compile(r"^\s*If\s+(?P<premises>.+?),\s*then\s+(?P<conclusions>.+?)\s*\.?\s*$", re.IGNORECASE)


def parse_rule_source(line: str) -> RuleSource:
    m = RULE_RE.match(line)
    if not m:
        raise CompileError(f"not an if-then statement: {line.strip()!r}")
    premises = _split_chunks(m.group("premises"), "and")
    conclusions = _split_chunks(m.group("conclusions"), "or")
    if not premises or not conclusions:
        raise CompileError(f"rule needs at least one premise and one conclusion: {line.strip()!r}")
    return RuleSource(tuple(premises), tuple(conclusions), line.strip())


def _split_chunks(text: str, connective: str) -> list[str]:
    chunks = []
    for piece in text.split(","):
        piece = piece.strip()
        if piece.lower().startswith(connective + " "):
            piece = piece[len(connective) + 1:]
        if piece:
            chunks.append(piece)
    return chunks


def typed_variable_base(name: str) -> str:
    """Domain predicate of a `$xyz` variable: lowercased, digits stripped."""
    return re.sub(r"[0-9]+$", "", name.lower()).strip("_") or name.lower()


def surface_variable_bases(text: str) -> dict[str, str]:
    """Map logic variable name -> domain base for every $token in a chunk."""
    out = {}
    for m in re.finditer(r"\$([A-Za-z][A-Za-z0-9_]*)", text):
        base = m.group(1)
        out[base[0].upper() + base[1:]] = typed_variable_base(base)
    return out


def _chunk_group(
    chunk: str,
    store: LvpStore,
    schemas: SchemaSet,
    lookup: ParseLookup,
    query_mode: bool = False,
) -> SentenceGroup:
    parse = lookup.get(chunk)
    if parse is None:
        raise CompileError(f"no dependency parse available for: {chunk!r}")
    try:
        return extract_sentence(parse, store, schemas, query_mode=query_mode)
    except ExtractError as exc:
        raise CompileError(str(exc)) from exc


def _emit_guards(
    ordered_parses: list[FrameParse],
    bound: set[str],
    schemas: SchemaSet,
) -> list[Literal]:
    """Domain guards for typed variables with no positive frame occurrence.

    Order: frames as given, roles in extraction order; one guard per
    (domain predicate, variable) pair.
    """
    guards: list[Literal] = []
    seen: set[tuple[str, str]] = set()
    for fp in ordered_parses:
        for role, _, filler in fp.fillers:
            if not isinstance(filler, Variable) or filler.name in bound:
                continue
            pred = schemas.domain_of(fp.frame, role)
            if (pred, filler.name) in seen:
                continue
            seen.add((pred, filler.name))
            guards.append(Literal(DomainAtom(pred, filler)))
    return guards


def inequality_guards(var_bases: dict[str, str], present: set[str]) -> list[Literal]:
    """`X!=Y` for distinct variables sharing a `$`-surface base name."""
    guards = []
    names = [v for v in var_bases if v in present]
    by_base: dict[str, list[str]] = {}
    for name in names:
        by_base.setdefault(var_bases[name], []).append(name)
    for base in sorted(by_base):
        group = sorted(by_base[base])
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                guards.append(
                    Literal(Comparison("!=", Variable(group[i]), Variable(group[j])))
                )
    return guards


def compile_rule(
    src: RuleSource,
    store: LvpStore,
    schemas: SchemaSet,
    lookup: ParseLookup,
) -> list[Rule]:
    """Compile one if-then statement; disjunction inside a premise or
    conjunction inside a conclusion multiplies the rule."""
    premise_alternatives: list[list[list[tuple[FrameParse, Literal]]]] = []
    for chunk in src.premises:
        naf = chunk.lower().startswith(NAF_PREFIX)
        body_text = chunk[len(NAF_PREFIX):] if naf else chunk
        group = _chunk_group(body_text, store, schemas, lookup)
        if not group.parses:
            raise CompileError(f"no frame recognized in premise: {body_text!r}")
        entries = [
            (fp, Literal(frame_parse_term(fp, schemas), naf)) for fp in group.parses
        ]
        if naf and len(entries) > 1:
            raise CompileError(
                f"'not provable' over a compound premise is not supported: {chunk!r}"
            )
        if group.connective == "disjunction":
            premise_alternatives.append([[entry] for entry in entries])
        else:
            premise_alternatives.append([entries])

    head_sets: list[list[FrameParse]] = []
    for chunk in src.conclusions:
        if chunk.lower().startswith(NAF_PREFIX):
            raise CompileError("'not provable' is prohibited in rule heads")
        group = _chunk_group(chunk, store, schemas, lookup)
        if not group.parses:
            raise CompileError(f"no frame recognized in conclusion: {chunk!r}")
        if group.connective == "conjunction":
            for fp in group.parses:
                head_sets.append([fp])
        else:
            head_sets.append(list(group.parses))

    var_bases = surface_variable_bases(src.raw)
    rules: list[Rule] = []
    for combo in product(*premise_alternatives):
        body_entries = [entry for chunk_entries in combo for entry in chunk_entries]
        premise_vars = set()
        for fp, _ in body_entries:
            for _, _, filler in fp.fillers:
                if isinstance(filler, Variable):
                    premise_vars.add(filler.name)
        for head_parses in head_sets:
            head_terms: list[UlrTerm] = []
            head_var_order: list[FrameParse] = []
            for fp in head_parses:
                head_terms.append(frame_parse_term(fp, schemas))
                head_var_order.append(fp)
            for term in head_terms:
                for name in sorted(term.variables() - premise_vars):
                    raise CompileError(
                        f"unsafe rule: variable {name} appears in a conclusion "
                        f"but in no premise"
                    )
            body = [lit for _, lit in body_entries]
            bound = set()
            for _, lit in body_entries:
                if not lit.naf:
                    bound |= lit.variables()
            guards = _emit_guards(head_var_order + [fp for fp, _ in body_entries], bound, schemas)
            all_vars = set()
            for term in head_terms:
                all_vars |= term.variables()
            for lit in body + guards:
                all_vars |= lit.variables()
            ineq = inequality_guards(var_bases, all_vars)
            rule = Rule(tuple(head_terms), tuple(body + guards + ineq))
            unsafe = rule.unsafe_variables()
            if unsafe:
                raise CompileError(f"unsafe rule: unguarded variables {', '.join(unsafe)}")
            rules.append(rule)
    return rules


def compile_rule_line(
    line: str, store: LvpStore, schemas: SchemaSet, lookup: ParseLookup
) -> list[Rule]:
    return compile_rule(parse_rule_source(line), store, schemas, lookup)


def compile_query(
    src: QuerySource | str,
    store: LvpStore,
    schemas: SchemaSet,
    lookup: ParseLookup,
) -> UlrTerm:
    """Compile a factual question (ending in `?`) into a query term."""
    text = src.text if isinstance(src, QuerySource) else src
    text = text.strip()
    if not text.endswith("?"):
        raise CompileError(f"queries must end with a question mark: {text!r}")
    group = _chunk_group(text[:-1].strip(), store, schemas, lookup, query_mode=True)
    if not group.parses:
        raise CompileError(f"unrecognized query: {text!r}")
    if len(group.parses) > 1:
        raise CompileError(f"query is not a single frame: {text!r}")
    return frame_parse_term(group.parses[0], schemas)


def check_safety(rule: Rule) -> list[str]:
    """Every head/naf/comparison variable lacking a positive occurrence."""
    return rule.unsafe_variables()
