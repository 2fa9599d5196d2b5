"""Finitely presented groups acting through field automorphisms."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .errors import EnumerationCap, MalformedSpec
from .fields import FieldAutomorphism

Word = tuple[tuple[str, int], ...]

DEFAULT_ENUM_CAP = 64

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^\(?(-?\d+)\)?)?")


def parse_word(text: str, generators: Sequence[str]) -> Word:
    """Parse "tau*sigma^-1*tau" (or space separated) into ((name, exponent), ...)."""
    out: list[tuple[str, int]] = []
    s = text.replace("*", " ").strip()
    if s in ("", "1", "e"):
        return ()
    pos = 0
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(s, pos)
        if not m:
            raise MalformedSpec(f"cannot parse group word {text!r}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name not in generators:
            raise MalformedSpec(f"unknown generator {name!r} in word {text!r}")
        if exp:
            out.append((name, exp))
        pos = m.end()
    return tuple(out)


def word_str(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in word)


def expand_word(word: Word) -> list[tuple[str, int]]:
    """Letters (name, ±1) in reading order."""
    out = []
    for name, e in word:
        step = 1 if e > 0 else -1
        out.extend([(name, step)] * abs(e))
    return out


@dataclass(frozen=True)
class PresentedGroup:
    generators: tuple[str, ...]
    relations: tuple[Word, ...]
    order: int | None = None
    label: str = ""
    relation_text: tuple[str, ...] = field(default=())

    @classmethod
    def from_strings(
        cls,
        generators: Sequence[str],
        relations: Sequence[str],
        order: int | None = None,
        label: str = "",
    ) -> "PresentedGroup":
        gens = tuple(generators)
        if len(set(gens)) != len(gens):
            raise MalformedSpec("generator names must be distinct")
        rels = tuple(parse_word(r, gens) for r in relations)
        return cls(gens, rels, order, label, tuple(relations))

    @classmethod
    def dihedral(cls, n: int, rot: str = "sigma", refl: str = "tau") -> "PresentedGroup":
        return cls.from_strings(
            [rot, refl],
            [f"{rot}^{n}", f"{refl}^2", f"{refl}*{rot}*{refl}*{rot}"],
            order=2 * n,
            label=f"D{n}",
        )

    @classmethod
    def cyclic(cls, n: int, gen: str = "sigma") -> "PresentedGroup":
        return cls.from_strings([gen], [f"{gen}^{n}"], order=n, label=f"C{n}")

    @classmethod
    def trivial(cls) -> "PresentedGroup":
        return cls((), (), 1, "1")


def evaluate_word(
    word: Word,
    assignment: dict[str, Any],
    mul: Callable[[Any, Any], Any],
    inv: Callable[[Any], Any],
    identity: Any,
) -> Any:
    """Product of the letters of `word`, read left to right as a composition."""
    out = identity
    for name, step in expand_word(word):
        g = assignment[name]
        out = mul(out, g if step > 0 else inv(g))
    return out


def automorphism_inverse(phi: FieldAutomorphism, cap: int = 720) -> FieldAutomorphism:
    ident = FieldAutomorphism.identity(phi.tower)
    prev = ident
    cur = phi
    for _ in range(cap):
        if cur.is_identity():
            return prev
        prev = cur
        cur = phi * cur
    raise EnumerationCap("automorphism order exceeds the cap; cannot invert")


@dataclass
class RelationCheck:
    relation: str
    value: dict[str, str]
    identity: bool


@dataclass
class RelationVerdict:
    passed: bool
    checks: list[RelationCheck]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "relations": [
                {"relation": c.relation, "value": c.value, "identity": c.identity}
                for c in self.checks
            ],
        }


def check_relations(
    group: PresentedGroup, assignment: dict[str, FieldAutomorphism]
) -> RelationVerdict:
    missing = [g for g in group.generators if g not in assignment]
    if missing:
        raise MalformedSpec(f"no automorphism assigned to {missing}")
    checks = []
    for rel in group.relations:
        tower = assignment[group.generators[0]].tower if group.generators else None
        value = evaluate_word(
            rel,
            assignment,
            lambda a, b: a * b,
            automorphism_inverse,
            FieldAutomorphism.identity(tower),
        )
        checks.append(RelationCheck(word_str(rel), value.describe(), value.is_identity()))
    return RelationVerdict(all(c.identity for c in checks), checks)


@dataclass
class Enumeration:
    elements: list[tuple[Word, Any]]
    presentation_order: int | None

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def smaller_than_presentation(self) -> bool:
        return self.presentation_order is not None and self.size < self.presentation_order


def enumerate_elements(
    generators: Sequence[str],
    assignment: dict[str, Any],
    mul: Callable[[Any, Any], Any],
    identity: Any,
    key: Callable[[Any], Any],
    cap: int = DEFAULT_ENUM_CAP,
) -> list[tuple[Word, Any]]:
    """Breadth-first closure under left multiplication by generators."""
    seen = {key(identity): ((), identity)}
    order = [((), identity)]
    frontier = [((), identity)]
    while frontier:
        new = []
        for word, g in frontier:
            for name in generators:
                h = mul(assignment[name], g)
                k = key(h)
                if k not in seen:
                    w: Word = ((name, 1),) + word
                    seen[k] = (w, h)
                    new.append((w, h))
                    order.append((w, h))
                    if len(order) > cap:
                        raise EnumerationCap(f"group has more than {cap} elements")
        frontier = new
    return order


def enumerate_group(
    group: PresentedGroup,
    assignment: dict[str, FieldAutomorphism],
    cap: int = DEFAULT_ENUM_CAP,
) -> Enumeration:
    if not group.generators:
        raise MalformedSpec("enumerating the trivial group needs a tower; use a generator")
    tower = assignment[group.generators[0]].tower
    elems = enumerate_elements(
        group.generators,
        assignment,
        lambda a, b: a * b,
        FieldAutomorphism.identity(tower),
        lambda a: a.signature(),
        cap,
    )
    return Enumeration(elems, group.order)
