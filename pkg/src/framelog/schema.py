"""Frame schemas: hand-authored YAML files defining frames, role->domain
mappings, role order, observability, and the domain hierarchy."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import yaml

from .terms import Constant, DomainAtom, Literal, Rule, UlrTerm, Variable


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class RoleSpec:
    name: str
    domain: str
    required: bool = False


@dataclass(frozen=True)
class FrameSchema:
    name: str
    roles: tuple[RoleSpec, ...]
    observable: bool = False
    action: bool = False

    def role(self, name: str) -> RoleSpec:
        for r in self.roles:
            if r.name == name:
                return r
        raise SchemaError(f"frame {self.name!r} has no role {name!r}")

    def role_order(self) -> list[str]:
        return [r.name for r in self.roles]


@dataclass
class SchemaSet:
    frames: dict[str, FrameSchema] = field(default_factory=dict)
    # domain -> list of subsumed domains, e.g. entity: [person, place]
    hierarchy: dict[str, list[str]] = field(default_factory=dict)
    # nouns treated as generic type-words during extraction
    generic_nouns: set[str] = field(default_factory=set)

    def merge(self, other: "SchemaSet") -> None:
        for name, frame in other.frames.items():
            if name in self.frames and self.frames[name] != frame:
                raise SchemaError(f"conflicting definitions for frame {name!r}")
            self.frames[name] = frame
        for parent, kids in other.hierarchy.items():
            merged = self.hierarchy.setdefault(parent, [])
            for k in kids:
                if k not in merged:
                    merged.append(k)
        self.generic_nouns |= other.generic_nouns

    def frame(self, name: str) -> FrameSchema:
        base = name[:-4] if name.endswith("_not") else name
        schema = self.frames.get(base)
        if schema is None:
            raise SchemaError(f"unknown frame {name!r}")
        return schema

    def has_frame(self, name: str) -> bool:
        base = name[:-4] if name.endswith("_not") else name
        return base in self.frames

    def domain_of(self, frame_name: str, role_name: str) -> str:
        return self.frame(frame_name).role(role_name).domain

    def sort_roles(self, term: UlrTerm) -> UlrTerm:
        """Reorder a term's roles into schema declaration order."""
        order = {r: i for i, r in enumerate(self.frame(term.frame_name).role_order())}
        roles = tuple(sorted(term.roles, key=lambda rf: order.get(rf[0], len(order))))
        return UlrTerm(term.frame_name, roles, term.negated)

    def hierarchy_rules(self) -> list[Rule]:
        """Bridging rules parent(X) :- child(X) for the declared hierarchy."""
        rules = []
        x = Variable("X")
        for parent in sorted(self.hierarchy):
            for child in self.hierarchy[parent]:
                rules.append(Rule((DomainAtom(parent, x),), (Literal(DomainAtom(child, x)),)))
        return rules

    def all_domain_predicates(self) -> set[str]:
        preds = {r.domain for f in self.frames.values() for r in f.roles}
        preds |= set(self.hierarchy)
        for kids in self.hierarchy.values():
            preds |= set(kids)
        return preds


def load_schema_text(text: str) -> SchemaSet:
    raw = yaml.safe_load(text) or {}
    out = SchemaSet()
    domains = raw.get("domains") or {}
    for parent, kids in (domains.get("hierarchy") or {}).items():
        out.hierarchy[str(parent)] = [str(k) for k in kids]
    out.generic_nouns = {str(g) for g in (domains.get("generic") or [])}
    for name, spec in (raw.get("frames") or {}).items():
        roles = []
        for entry in spec.get("roles") or []:
            if not isinstance(entry, dict) or "name" not in entry:
                raise SchemaError(f"frame {name!r}: each role needs a name")
            role_name = str(entry["name"])
            domain = str(entry.get("domain", role_name.lower()))
            roles.append(RoleSpec(role_name, domain, bool(entry.get("required", False))))
        seen = {r.name for r in roles}
        if len(seen) != len(roles):
            raise SchemaError(f"frame {name!r}: duplicate role names")
        out.frames[str(name)] = FrameSchema(
            str(name),
            tuple(roles),
            observable=bool(spec.get("observable", False)),
            action=bool(spec.get("action", False)),
        )
    return out


def load_schema_file(path: str) -> SchemaSet:
    with open(path, encoding="utf-8") as fh:
        return load_schema_text(fh.read())


BUNDLED = ("commerce", "medical", "motion")


def bundled_data_text(relpath: str) -> str:
    """Read a bundled data file, e.g. 'medical/schemas.yaml'."""
    root = importlib.resources.files("framelog").joinpath("data")
    return root.joinpath(relpath).read_text(encoding="utf-8")


def load_bundled_schemas(names) -> SchemaSet:
    out = SchemaSet()
    for name in names:
        if name not in BUNDLED:
            raise SchemaError(f"no bundled schema set {name!r}; choose from {BUNDLED}")
        out.merge(load_schema_text(bundled_data_text(f"{name}/schemas.yaml")))
    return out


def filler_domain_atom(schemas: SchemaSet, frame_name: str, role: str, filler) -> DomainAtom | None:
    if isinstance(filler, Constant):
        return DomainAtom(schemas.domain_of(frame_name, role), filler)
    return None
