"""Recency+agreement pronoun resolution over dependency parses.

Replaces the external neural coreference tool: gendered singular pronouns
bind to the most recent proper noun of compatible gender; plural pronouns
bind to the nearest preceding coordination of proper nouns, duplicating
the sentence per member. Known failure class: like the tool it replaces,
plural binding picks the nearest coordination even when discourse favors
an earlier one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conllu import DepParse, Token

MALE_NAMES = {
    "daniel", "john", "bob", "fred", "bill", "jeff", "brian", "greg",
    "julius", "bernhard", "sumit", "antoine", "jason", "yann",
}
FEMALE_NAMES = {
    "mary", "sandra", "julie", "winona", "gertrude", "lily", "jessica",
    "emily", "margaret",
}

SINGULAR_PRONOUNS = {
    "he": "male", "him": "male", "his": "male",
    "she": "female", "her": "female", "hers": "female",
}
PLURAL_PRONOUNS = {"they", "them"}


def name_gender(name: str) -> str | None:
    low = name.lower()
    if low in MALE_NAMES:
        return "male"
    if low in FEMALE_NAMES:
        return "female"
    return None


@dataclass
class _History:
    # (form, gender) most recent last
    singles: list[tuple[str, str | None]]
    groups: list[tuple[str, ...]]

    def record(self, parse: DepParse, upto: int | None = None) -> None:
        group_members: dict[int, list[str]] = {}
        for t in parse.tokens:
            if upto is not None and t.id >= upto:
                break
            if t.upos != "PROPN":
                continue
            self.singles.append((t.form, name_gender(t.form)))
            if t.deprel == "conj" and parse.token(t.head).upos == "PROPN":
                group_members.setdefault(t.head, []).append(t.form)
        for head_id, members in group_members.items():
            head = parse.token(head_id)
            if upto is not None and head.id >= upto:
                continue
            self.groups.append(tuple([head.form] + members))

    def last_single(self, gender: str) -> str | None:
        for form, g in reversed(self.singles):
            if g == gender or g is None:
                return form
        return None

    def last_group(self) -> tuple[str, ...] | None:
        return self.groups[-1] if self.groups else None


def _replace_token(parse: DepParse, tid: int, form: str) -> DepParse:
    tokens = [
        Token(t.id, form, form, "PROPN", t.head, t.deprel) if t.id == tid else t
        for t in parse.tokens
    ]
    return DepParse(tokens, parse.sentence_text)


def resolve_with_indices(
    parses: list[DepParse], diagnostics: list[str] | None = None
) -> list[tuple[DepParse, int]]:
    """Resolve pronouns document-wide; returns (parse, source index) pairs
    so duplicated sentences can share their source's timestamp."""
    history = _History([], [])
    out: list[tuple[DepParse, int]] = []
    for index, parse in enumerate(parses):
        pending = [parse]
        for token in list(parse.tokens):
            lemma = token.lemma.lower()
            if lemma in SINGULAR_PRONOUNS:
                gender = SINGULAR_PRONOUNS[lemma]
                local = _History(list(history.singles), list(history.groups))
                local.record(parse, upto=token.id)
                antecedent = local.last_single(gender)
                if antecedent is None:
                    if diagnostics is not None:
                        diagnostics.append(
                            f"unresolvable pronoun {token.form!r} in {parse.text()!r}"
                        )
                    continue
                pending = [_replace_token(p, token.id, antecedent) for p in pending]
            elif lemma in PLURAL_PRONOUNS:
                group = history.last_group()
                if group is None:
                    if diagnostics is not None:
                        diagnostics.append(
                            f"unresolvable pronoun {token.form!r} in {parse.text()!r}"
                        )
                    continue
                pending = [
                    _replace_token(p, token.id, member)
                    for p in pending
                    for member in group
                ]
        for resolved in pending:
            out.append((resolved, index))
        history.record(parses[index] if pending == [parses[index]] else pending[0])
    return out


def resolve_coreference(
    parses: list[DepParse], diagnostics: list[str] | None = None
) -> list[DepParse]:
    return [p for p, _ in resolve_with_indices(parses, diagnostics)]
