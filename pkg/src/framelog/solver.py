"""Grounding and disjunctive stable-model computation.

Desk-scale by design: ground-and-search with unit propagation, support
propagation, and an unfounded-set sweep; every total assignment is
verified against the reduct-minimality definition before it is reported.
`oracle_answer_sets` is the independent brute-force checker used by the
test suite and stays free of the search machinery.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

from .terms import (
    Atom,
    Comparison,
    Constant,
    DomainAtom,
    Literal,
    Program,
    Rule,
    TemporalAtom,
    UlrTerm,
    Variable,
)


class SolverError(RuntimeError):
    pass


class ResourceError(SolverError):
    pass


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except ValueError:
        return default


def max_ground_rules() -> int:
    return _env_int("FRAMELOG_MAX_GROUND_RULES", 100_000)


def solve_budget_seconds() -> float:
    try:
        return float(os.environ.get("FRAMELOG_SOLVE_BUDGET", 10.0))
    except ValueError:
        return 10.0


# --- matching ----------------------------------------------------------------


def _atom_key(atom: Atom):
    if isinstance(atom, UlrTerm):
        return ("f", atom.rendered_name, tuple(r for r, _ in atom.roles))
    if isinstance(atom, DomainAtom):
        return ("d", atom.predicate)
    return ("t", atom.functor)


def _match_filler(pattern, ground, binding):
    if isinstance(pattern, Variable):
        bound = binding.get(pattern.name)
        if bound is None:
            binding = dict(binding)
            binding[pattern.name] = ground
            return binding
        return binding if bound == ground else None
    return binding if pattern == ground else None


def match_atom(pattern: Atom, ground: Atom, binding: dict) -> dict | None:
    """Extend `binding` so that pattern[binding] == ground, or None.

    Frame matching here is exact (same roles in the same order); the
    looser role-subset semantics applies only to queries.
    """
    if isinstance(pattern, UlrTerm):
        if not isinstance(ground, UlrTerm):
            return None
        if pattern.rendered_name != ground.rendered_name or len(pattern.roles) != len(ground.roles):
            return None
        for (pr, pf), (gr, gf) in zip(pattern.roles, ground.roles):
            if pr != gr:
                return None
            binding = _match_filler(pf, gf, binding)
            if binding is None:
                return None
        return binding
    if isinstance(pattern, DomainAtom):
        if not isinstance(ground, DomainAtom) or pattern.predicate != ground.predicate:
            return None
        return _match_filler(pattern.argument, ground.argument, binding)
    if isinstance(pattern, TemporalAtom):
        if not isinstance(ground, TemporalAtom) or pattern.functor != ground.functor:
            return None
        for pa, ga in zip(pattern.args, ground.args):
            if isinstance(pa, Variable):
                bound = binding.get(pa.name)
                if bound is None:
                    binding = dict(binding)
                    binding[pa.name] = ga
                elif bound != ga:
                    return None
            elif isinstance(pa, UlrTerm):
                if not isinstance(ga, UlrTerm):
                    return None
                binding = match_atom(pa, ga, binding)
                if binding is None:
                    return None
            elif pa != ga:
                return None
        return binding
    return None


def _substitute_atom(atom: Atom, binding: dict) -> Atom:
    if isinstance(atom, (UlrTerm, DomainAtom)):
        return atom.substitute(binding)
    args = []
    for a in atom.args:
        if isinstance(a, Variable):
            args.append(binding.get(a.name, a))
        elif isinstance(a, UlrTerm):
            args.append(a.substitute(binding))
        else:
            args.append(a)
    return TemporalAtom(atom.functor, tuple(args))


# --- grounding ----------------------------------------------------------------


@dataclass
class GroundRule:
    head: tuple[Atom, ...]
    positive: tuple[Atom, ...]
    naf: tuple[Atom, ...]

    def key(self):
        return (self.head, self.positive, self.naf)


@dataclass
class GroundProgram:
    rules: list[GroundRule]
    universe: list[Atom]

    def render(self) -> str:
        lines = []
        for r in self.rules:
            head = " v ".join(a.render() for a in r.head)
            body = [a.render() for a in r.positive] + [f"not {a.render()}" for a in r.naf]
            if body and head:
                lines.append(f"{head} :- {', '.join(body)}.")
            elif body:
                lines.append(f":- {', '.join(body)}.")
            else:
                lines.append(f"{head}.")
        return "\n".join(lines)


def ground(program: Program) -> GroundProgram:
    """Instantiate every rule over the derivable-atom pool to fixpoint.

    The pool holds every atom that could possibly be derived (facts plus
    head atoms of applicable ground instances); comparisons are evaluated
    during instantiation, naf literals against the final pool.
    """
    for rule in program.rules:
        unsafe = rule.unsafe_variables()
        if unsafe:
            raise SolverError(f"unsafe rule reached the grounder: {rule.render()} ({unsafe})")

    pool: set[Atom] = set()
    index: dict[tuple, list[Atom]] = {}

    def pool_add(atom: Atom) -> bool:
        if atom in pool:
            return False
        pool.add(atom)
        index.setdefault(_atom_key(atom), []).append(atom)
        return True

    raw_ground: set[tuple] = set()
    limit = max_ground_rules()

    def instantiate(rule: Rule) -> bool:
        """Returns True when a new ground instance or pool atom appeared."""
        changed = False
        positive = [
            lit for lit in rule.body if not lit.naf and not isinstance(lit.atom, Comparison)
        ]
        comparisons = [lit.atom for lit in rule.body if isinstance(lit.atom, Comparison)]
        nafs = [lit.atom for lit in rule.body if lit.naf]

        def finish(binding: dict) -> None:
            nonlocal changed
            for comp in comparisons:
                if not comp.substitute(binding).holds():
                    return
            head = tuple(_substitute_atom(a, binding) for a in rule.head)
            pos = tuple(_substitute_atom(a.atom, binding) for a in positive)
            naf = tuple(_substitute_atom(a, binding) for a in nafs)
            key = (head, pos, naf)
            if key not in raw_ground:
                if len(raw_ground) >= limit:
                    raise ResourceError(
                        f"ground program exceeds {limit} rules; raise FRAMELOG_MAX_GROUND_RULES"
                    )
                raw_ground.add(key)
                changed = True
                for atom in head:
                    if pool_add(atom):
                        changed = True

        def join(i: int, binding: dict) -> None:
            if i == len(positive):
                finish(binding)
                return
            pattern = positive[i].atom
            ground_pattern = _substitute_atom(pattern, binding)
            if not ground_pattern.variables():
                if ground_pattern in pool:
                    join(i + 1, binding)
                return
            for candidate in index.get(_atom_key(ground_pattern), []):
                extended = match_atom(ground_pattern, candidate, binding)
                if extended is not None:
                    join(i + 1, extended)

        join(0, {})
        return changed

    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            if instantiate(rule):
                changed = True

    rules: list[GroundRule] = []
    seen = set()
    for (head, pos, naf) in raw_ground:
        naf_kept = tuple(a for a in naf if a in pool)
        gr = GroundRule(head, pos, naf_kept)
        if gr.key() not in seen:
            seen.add(gr.key())
            rules.append(gr)
    universe = sorted(pool, key=lambda a: a.render())
    return GroundProgram(rules, universe)


# --- stable model search -------------------------------------------------------

TRUE, FALSE, UNDEC = 1, 0, -1


class _Search:
    def __init__(self, gp: GroundProgram, budget: float):
        self.atoms = list(gp.universe)
        self.ids = {a: i for i, a in enumerate(self.atoms)}
        self.n = len(self.atoms)
        self.rules = [
            (
                tuple(self.ids[a] for a in r.head),
                tuple(self.ids[a] for a in r.positive),
                tuple(self.ids[a] for a in r.naf),
            )
            for r in gp.rules
        ]
        self.head_rules: list[list[int]] = [[] for _ in range(self.n)]
        for ri, (head, _, _) in enumerate(self.rules):
            for a in head:
                self.head_rules[a].append(ri)
        self.deadline = time.monotonic() + budget
        self.models: list[frozenset[int]] = []

    def _check_budget(self) -> None:
        if time.monotonic() > self.deadline:
            raise ResourceError(
                f"solve budget exceeded over {self.n} atoms; raise FRAMELOG_SOLVE_BUDGET"
            )

    def propagate(self, assign: list[int]) -> bool:
        changed = True
        while changed:
            self._check_budget()
            changed = False
            # clause propagation: rule as clause (~pos | naf | head)
            for head, pos, naf in self.rules:
                undecided = None
                satisfied = False
                count_undec = 0
                for a in pos:
                    if assign[a] == FALSE:
                        satisfied = True
                        break
                    if assign[a] == UNDEC:
                        count_undec += 1
                        undecided = ("pos", a)
                if not satisfied:
                    for a in naf:
                        if assign[a] == TRUE:
                            satisfied = True
                            break
                        if assign[a] == UNDEC:
                            count_undec += 1
                            undecided = ("naf", a)
                if not satisfied:
                    for a in head:
                        if assign[a] == TRUE:
                            satisfied = True
                            break
                        if assign[a] == UNDEC:
                            count_undec += 1
                            undecided = ("head", a)
                if satisfied:
                    continue
                if count_undec == 0:
                    return False
                if count_undec == 1:
                    kind, a = undecided
                    if kind == "pos":
                        assign[a] = FALSE
                    elif kind == "naf":
                        assign[a] = TRUE
                    else:
                        assign[a] = TRUE
                    changed = True
            # support: an atom with no live supporting rule is false
            for a in range(self.n):
                if assign[a] == FALSE:
                    continue
                live = False
                for ri in self.head_rules[a]:
                    head, pos, naf = self.rules[ri]
                    dead = any(assign[p] == FALSE for p in pos) or any(
                        assign[nn] == TRUE for nn in naf
                    )
                    if not dead:
                        live = True
                        break
                if not live:
                    if assign[a] == TRUE:
                        return False
                    assign[a] = FALSE
                    changed = True
            # unfounded sweep: atoms outside the optimistic closure are false
            closure = [False] * self.n
            grew = True
            while grew:
                grew = False
                for head, pos, naf in self.rules:
                    if any(assign[nn] == TRUE for nn in naf):
                        continue
                    if any(assign[p] == FALSE for p in pos):
                        continue
                    if all(closure[p] for p in pos):
                        for a in head:
                            if assign[a] != FALSE and not closure[a]:
                                closure[a] = True
                                grew = True
            for a in range(self.n):
                if not closure[a] and assign[a] != FALSE:
                    if assign[a] == TRUE:
                        return False
                    assign[a] = FALSE
                    changed = True
        return True

    def search(self, assign: list[int]) -> None:
        self._check_budget()
        work = list(assign)
        if not self.propagate(work):
            return
        try:
            pivot = work.index(UNDEC)
        except ValueError:
            model = frozenset(i for i in range(self.n) if work[i] == TRUE)
            if self.is_stable(model):
                self.models.append(model)
            return
        for value in (TRUE, FALSE):
            branch = list(work)
            branch[pivot] = value
            self.search(branch)

    def reduct(self, model: frozenset[int]):
        out = []
        for head, pos, naf in self.rules:
            if any(a in model for a in naf):
                continue
            out.append((head, pos))
        return out

    def is_stable(self, model: frozenset[int]) -> bool:
        reduct = self.reduct(model)
        for head, pos in reduct:
            if all(p in model for p in pos) and not any(h in model for h in head):
                return False
        return not self._has_smaller_model(reduct, model)

    def _has_smaller_model(self, reduct, model: frozenset[int]) -> bool:
        """Search for a model S properly below `model` of the positive reduct.

        Heads are restricted to atoms of `model` (anything else is false in
        any S below it); Horn consequences are forced, disjunctive rules
        branch over their head atoms, memoized on the closed set.
        """
        relevant = [
            (tuple(h for h in head if h in model), pos)
            for head, pos in reduct
            if all(p in model for p in pos)
        ]
        horn = [(head[0], pos) for head, pos in relevant if len(head) == 1]
        disjunctive = [(head, pos) for head, pos in relevant if len(head) > 1]

        def horn_closure(base: frozenset[int]) -> frozenset[int]:
            forced = set(base)
            grew = True
            while grew:
                grew = False
                for head_atom, pos in horn:
                    if head_atom not in forced and all(p in forced for p in pos):
                        forced.add(head_atom)
                        grew = True
            return frozenset(forced)

        least = horn_closure(frozenset())
        if not disjunctive:
            return least != model
        seen: set[frozenset[int]] = set()

        def extend(s: frozenset[int]) -> bool:
            self._check_budget()
            if s in seen or not s < model:
                return False
            seen.add(s)
            for head, pos in disjunctive:
                if all(p in s for p in pos) and not any(h in s for h in head):
                    return any(extend(horn_closure(s | {h})) for h in head)
            return True  # every rule satisfied and s is a proper subset

        return extend(least)


def answer_sets(gp: GroundProgram) -> list[list[Atom]]:
    """All stable models, each a sorted atom list; list sorted for determinism."""
    if not gp.rules:
        return [[]]
    search = _Search(gp, solve_budget_seconds())
    search.search([UNDEC] * search.n)
    models = sorted(
        {m for m in search.models},
        key=lambda m: tuple(sorted(gp.universe[i].render() for i in m)),
    )
    return [sorted((gp.universe[i] for i in m), key=lambda a: a.render()) for m in models]


# --- independent oracle --------------------------------------------------------


def oracle_answer_sets(gp: GroundProgram) -> list[list[Atom]]:
    """Brute-force stable models straight from the definition.

    Disjunctive programs: enumerate all interpretations over the universe
    (capped at 20 atoms) and test model-of-program plus reduct minimality
    by exhaustive subset check. Normal programs: enumerate naf-atom
    subsets and compare against the least model of the GL reduct.
    """
    atoms = list(gp.universe)
    ids = {a: i for i, a in enumerate(atoms)}
    n = len(atoms)
    rules = [
        (
            frozenset(ids[a] for a in r.head),
            frozenset(ids[a] for a in r.positive),
            frozenset(ids[a] for a in r.naf),
        )
        for r in gp.rules
    ]
    disjunctive = any(len(h) > 1 for h, _, _ in rules)

    def is_model(s: frozenset[int], use_rules) -> bool:
        for head, pos, naf in use_rules:
            if pos <= s and not (naf & s) and not (head & s):
                return False
        return True

    def reduct(s: frozenset[int]):
        return [(h, p, frozenset()) for h, p, naf in rules if not (naf & s)]

    results: set[frozenset[int]] = set()
    if disjunctive:
        if n > 20:
            raise ResourceError(f"oracle refuses disjunctive universe of {n} atoms (> 20)")
        for mask in range(1 << n):
            s = frozenset(i for i in range(n) if mask >> i & 1)
            if not is_model(s, rules):
                continue
            red = reduct(s)
            minimal = True
            members = sorted(s)
            for submask in range(1 << len(members)):
                if submask == (1 << len(members)) - 1:
                    continue
                sub = frozenset(members[i] for i in range(len(members)) if submask >> i & 1)
                if is_model(sub, red):
                    minimal = False
                    break
            if minimal:
                results.add(s)
    else:
        naf_atoms = sorted({a for _, _, naf in rules for a in naf})
        if len(naf_atoms) > 22:
            raise ResourceError(f"oracle refuses {len(naf_atoms)} naf atoms (> 22)")
        for mask in range(1 << len(naf_atoms)):
            guess = frozenset(naf_atoms[i] for i in range(len(naf_atoms)) if mask >> i & 1)
            live = [(h, p) for h, p, naf in rules if not (naf & guess)]
            least: set[int] = set()
            grew = True
            while grew:
                grew = False
                for head, pos in live:
                    if pos <= least and not (head & least):
                        (atom,) = head
                        least.add(atom)
                        grew = True
            t = frozenset(least)
            if t & frozenset(naf_atoms) == guess and is_model(t, rules):
                results.add(t)
    models = sorted(results, key=lambda m: tuple(sorted(atoms[i].render() for i in m)))
    return [sorted((atoms[i] for i in m), key=lambda a: a.render()) for m in models]


# --- querying -------------------------------------------------------------------


@dataclass
class QueryResult:
    mode: str
    bindings: list[dict[str, Constant]]
    var_order: list[str]
    incoherent: bool = False

    def render_lines(self) -> list[str]:
        lines = []
        for b in self.bindings:
            inner = ",".join(f"{v}={b[v].render()}" for v in self.var_order if v in b)
            lines.append("{" + inner + "}")
        return lines


def _query_vars(q) -> list[str]:
    order: list[str] = []

    def visit(filler) -> None:
        if isinstance(filler, Variable) and filler.name not in order:
            order.append(filler.name)

    if isinstance(q, UlrTerm):
        for _, f in q.roles:
            visit(f)
    elif isinstance(q, TemporalAtom):
        for a in q.args:
            if isinstance(a, UlrTerm):
                for _, f in a.roles:
                    visit(f)
            else:
                visit(a)
    return order


def match_query_frame(query: UlrTerm, fact: UlrTerm, binding: dict) -> dict | None:
    """Role-subset semantics: the query's roles must be a subset of the
    fact's, agreeing on shared roles."""
    if query.rendered_name != fact.rendered_name:
        return None
    fact_roles = fact.role_map()
    for role, pattern in query.roles:
        if role not in fact_roles:
            return None
        binding = _match_filler(pattern, fact_roles[role], binding)
        if binding is None:
            return None
    return binding


def _match_query(q, atom, binding) -> dict | None:
    if isinstance(q, UlrTerm):
        if not isinstance(atom, UlrTerm):
            return None
        return match_query_frame(q, atom, binding)
    if isinstance(q, TemporalAtom):
        if not isinstance(atom, TemporalAtom) or atom.functor != q.functor:
            return None
        for pa, ga in zip(q.args, atom.args):
            if isinstance(pa, UlrTerm):
                if not isinstance(ga, UlrTerm):
                    return None
                binding = match_query_frame(pa, ga, binding)
            elif isinstance(pa, Variable):
                binding = _match_filler(pa, ga, binding)
            else:
                binding = binding if pa == ga else None
            if binding is None:
                return None
        return binding
    return None


def query(
    gp: GroundProgram,
    q,
    mode: str = "brave",
    schemas=None,
    precomputed: list[list[Atom]] | None = None,
) -> QueryResult:
    """Answer a query term over the program's stable models."""
    if mode not in ("brave", "cautious"):
        raise SolverError(f"unknown mode {mode!r}")
    inner = q
    if isinstance(q, TemporalAtom):
        for a in q.args:
            if isinstance(a, UlrTerm):
                inner = a
    if schemas is not None and isinstance(inner, UlrTerm):
        if not schemas.has_frame(inner.rendered_name):
            raise SolverError(f"unknown frame {inner.rendered_name!r} in query")
    sets = precomputed if precomputed is not None else answer_sets(gp)
    var_order = _query_vars(q)
    per_set: list[set] = []
    for model in sets:
        found = set()
        for atom in model:
            b = _match_query(q, atom, {})
            if b is not None:
                found.add(tuple(sorted(b.items())))
        per_set.append(found)
    if not per_set:
        return QueryResult(mode, [], var_order, incoherent=True)
    if mode == "brave":
        merged = set().union(*per_set)
    else:
        merged = set.intersection(*per_set)
    bindings = [dict(items) for items in merged]
    bindings.sort(key=lambda b: tuple(b[v].render() for v in var_order if v in b))
    return QueryResult(mode, bindings, var_order)


def solve_program(program: Program) -> GroundProgram:
    return ground(program)
