"""Simplified event calculus assembly: narrative occurrences, fluent
initiation/termination statements, inertia axioms, time-wrapped rules,
and temporal queries."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .conllu import DepParse, ParseLookup
from .extract import FrameParse, compose_ulr, extract_sentence, frame_parse_term
from .lvp import LvpStore
from .rules import CompileError, _emit_guards, inequality_guards, surface_variable_bases
from .schema import SchemaSet
from .terms import (
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


@dataclass(frozen=True)
class Occurrence:
    payload: UlrTerm
    time: int

    def atom(self) -> TemporalAtom:
        return TemporalAtom("happensAt", (self.payload, Constant("int", str(self.time))))

    def render(self) -> str:
        return self.atom().render() + "."


@dataclass(frozen=True)
class InitTermStatement:
    kind: str  # "initiation" | "termination"
    trigger: str
    effect: str
    raw: str


STMT_RE = re.compile(
    r"^\s*(?P<trigger>.+?)\s+(?P<kind>initiates|terminates)\s+(?P<effect>.+?)\s*\.?\s*$"
)


def parse_init_term_line(line: str) -> InitTermStatement:
    m = STMT_RE.match(line)
    if not m:
        raise CompileError(f"not an initiation/termination statement: {line.strip()!r}")
    kind = "initiation" if m.group("kind") == "initiates" else "termination"
    return InitTermStatement(kind, m.group("trigger"), m.group("effect"), line.strip())


def _single_parse(
    text: str, store: LvpStore, schemas: SchemaSet, lookup: ParseLookup
) -> FrameParse:
    parse = lookup.get(text)
    if parse is None:
        raise CompileError(f"no dependency parse available for: {text!r}")
    group = extract_sentence(parse, store, schemas)
    if group.connective is not None:
        raise CompileError(
            f"conjunction/disjunction is not allowed in initiation/termination parts: {text!r}"
        )
    if len(group.parses) != 1:
        raise CompileError(f"expected exactly one frame in: {text!r}")
    return group.parses[0]


def compile_init_term(
    stmt: InitTermStatement,
    store: LvpStore,
    schemas: SchemaSet,
    lookup: ParseLookup,
) -> Rule:
    """initiates(Trigger,Effect)/terminates(...) with domain guards.

    Initiation guards cover trigger roles only (effect variables must be
    trigger-bound); termination also guards effect roles, since the
    terminated fluent may introduce new variables (the one-place-at-a-time
    pattern), plus an inequality guard per shared `$`-base pair.
    """
    trigger_fp = _single_parse(stmt.trigger, store, schemas, lookup)
    effect_fp = _single_parse(stmt.effect, store, schemas, lookup)
    trigger = frame_parse_term(trigger_fp, schemas)
    effect = frame_parse_term(effect_fp, schemas)
    trigger_vars = trigger.variables()
    if stmt.kind == "initiation":
        free = sorted(effect.variables() - trigger_vars)
        if free:
            raise CompileError(
                f"unbound effect variable{'s' if len(free) > 1 else ''} "
                f"{', '.join(v.lower() for v in free)}: initiated fluents may only "
                f"use variables of the trigger"
            )
        ordered = [trigger_fp]
    else:
        ordered = [trigger_fp, effect_fp]
    guards = _emit_guards(ordered, set(), schemas)
    var_bases = surface_variable_bases(stmt.raw)
    present = trigger.variables() | effect.variables()
    ineq = inequality_guards(var_bases, present)
    functor = "initiates" if stmt.kind == "initiation" else "terminates"
    head = TemporalAtom(functor, (trigger, effect))
    rule = Rule((head,), tuple(guards + ineq))
    unsafe = rule.unsafe_variables()
    if unsafe:
        raise CompileError(f"unsafe statement: unguarded variables {', '.join(unsafe)}")
    return rule


def compile_init_term_line(
    line: str, store: LvpStore, schemas: SchemaSet, lookup: ParseLookup
) -> Rule:
    return compile_init_term(parse_init_term_line(line), store, schemas, lookup)


@dataclass
class NarrativeProgram:
    occurrences: list[Occurrence]
    timestamp_domain: RangeFact
    domain_atoms: list[DomainAtom]
    observable_facts: list[TemporalAtom]
    disjunctive_rules: list[Rule]
    diagnostics: list[str]

    def rules(self) -> list[Rule]:
        out: list[Rule] = [Rule((occ.atom(),)) for occ in self.occurrences]
        out.extend(self.disjunctive_rules)
        out.extend(Rule((a,)) for a in self.observable_facts)
        out.extend(Rule((a,)) for a in self.domain_atoms)
        return out


def narrative_to_occurrences(
    parses: list[DepParse] | list[tuple[DepParse, int]],
    store: LvpStore,
    schemas: SchemaSet,
) -> NarrativeProgram:
    """Sentence k (1-based, original order) becomes an occurrence at time k.

    Coreference-duplicated sentences share their source's timestamp; the
    timestamp domain is sized n+1 to reserve the query instant. Observable
    frames additionally assert `observable(f).` for the bridge axiom.
    """
    pairs: list[tuple[DepParse, int]] = []
    for entry in parses:
        if isinstance(entry, tuple):
            pairs.append(entry)
        else:
            pairs.append((entry, len(pairs)))
    n = (max(i for _, i in pairs) + 1) if pairs else 0
    occurrences: list[Occurrence] = []
    domain_atoms: list[DomainAtom] = []
    observable_facts: list[TemporalAtom] = []
    disjunctive: list[Rule] = []
    diagnostics: list[str] = []
    seen_domain = set()
    for parse, orig_index in pairs:
        time = orig_index + 1
        group = extract_sentence(parse, store, schemas)
        diagnostics.extend(group.diagnostics)
        if not group.parses:
            continue
        _, atoms = compose_ulr(group, schemas)
        for atom in atoms:
            if atom not in seen_domain:
                seen_domain.add(atom)
                domain_atoms.append(atom)
        terms = [frame_parse_term(fp, schemas) for fp in group.parses]
        for term in terms:
            schema = schemas.frame(term.frame_name)
            if not schema.action and not schema.observable:
                raise CompileError(
                    f"frame {term.frame_name!r} is neither an action nor observable; "
                    f"it cannot occur in a narrative"
                )
        if group.connective == "disjunction" and len(terms) > 1:
            head = tuple(
                TemporalAtom("happensAt", (t, Constant("int", str(time)))) for t in terms
            )
            disjunctive.append(Rule(head))
            for term in terms:
                if schemas.frame(term.frame_name).observable:
                    observable_facts.append(TemporalAtom("observable", (term,)))
            continue
        for term in terms:
            occurrences.append(Occurrence(term, time))
            if schemas.frame(term.frame_name).observable:
                observable_facts.append(TemporalAtom("observable", (term,)))
    domain = RangeFact("timestamp", 1, n + 1 if n else 1)
    return NarrativeProgram(
        occurrences, domain, domain_atoms, observable_facts, disjunctive, diagnostics
    )


def sec_axioms() -> list[Rule]:
    """The two inertia rules plus the observable-fluent bridge."""
    f, a = Variable("F"), Variable("A")
    t, t1, t2 = Variable("T"), Variable("T1"), Variable("T2")
    holds = Rule(
        (TemporalAtom("holdsAt", (f, t2)),),
        (
            Literal(TemporalAtom("happensAt", (a, t1))),
            Literal(TemporalAtom("initiates", (a, f))),
            Literal(DomainAtom("timestamp", t2)),
            Literal(Comparison("<", t1, t2)),
            Literal(TemporalAtom("stoppedIn", (t1, f, t2)), naf=True),
        ),
    )
    stopped = Rule(
        (TemporalAtom("stoppedIn", (t1, f, t2)),),
        (
            Literal(TemporalAtom("happensAt", (a, t))),
            Literal(TemporalAtom("terminates", (a, f))),
            Literal(DomainAtom("timestamp", t1)),
            Literal(Comparison("<", t1, t)),
            Literal(DomainAtom("timestamp", t2)),
            Literal(Comparison("<", t, t2)),
        ),
    )
    bridge = Rule(
        (TemporalAtom("initiates", (f, f)),),
        (Literal(TemporalAtom("observable", (f,))),),
    )
    return [holds, stopped, bridge]


def _fresh_time_variable(rule: Rule) -> Variable:
    used = rule.variables()
    name = "T"
    counter = 0
    while name in used:
        counter += 1
        name = f"T{counter}"
    return Variable(name)


def wrap_time_rule(rule: Rule) -> Rule:
    """Wrap every frame atom in holdsAt sharing one timestamp variable."""
    t = _fresh_time_variable(rule)
    head = tuple(
        TemporalAtom("holdsAt", (a, t)) if isinstance(a, UlrTerm) else a for a in rule.head
    )
    body = [
        Literal(TemporalAtom("holdsAt", (lit.atom, t)), lit.naf)
        if isinstance(lit.atom, UlrTerm)
        else lit
        for lit in rule.body
    ]
    body.append(Literal(DomainAtom("timestamp", t)))
    return Rule(head, tuple(body))


def unwrap_time_rule(rule: Rule) -> Rule:
    """Inverse of wrap_time_rule for round-trip checks."""
    def strip(atom):
        if isinstance(atom, TemporalAtom) and atom.functor == "holdsAt":
            return atom.args[0]
        return atom

    head = tuple(strip(a) for a in rule.head)
    body = tuple(
        Literal(strip(lit.atom), lit.naf)
        for lit in rule.body
        if not (isinstance(lit.atom, DomainAtom) and lit.atom.predicate == "timestamp")
    )
    return Rule(head, body)


def build_temporal_query(query_term: UlrTerm, domain: RangeFact) -> TemporalAtom:
    """holdsAt(query, tmax) with tmax the top of the timestamp domain."""
    if domain.low > domain.high:
        raise CompileError("empty timestamp domain")
    return TemporalAtom("holdsAt", (query_term, Constant("int", str(domain.high))))
