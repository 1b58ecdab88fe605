"""CTL abstract syntax.

Formulas are immutable, hashable trees.  ``Top`` and ``Bottom`` stand for the
constants true and false; ``EUt``/``AUt`` are the until-tilde (release)
operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Top:
    def __repr__(self) -> str:
        return "Top()"


@dataclass(frozen=True)
class Bottom:
    def __repr__(self) -> str:
        return "Bottom()"


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class EX:
    arg: "Formula"


@dataclass(frozen=True)
class AX:
    arg: "Formula"


@dataclass(frozen=True)
class EU:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AU:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class EUt:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AUt:
    left: "Formula"
    right: "Formula"


Formula = Union[Top, Bottom, Atom, Not, And, Or, EX, AX, EU, AU, EUt, AUt]

TOP = Top()
BOTTOM = Bottom()

# Long names, for callers who prefer them.
ExistsNext, ForallNext = EX, AX
ExistsUntil, ForallUntil = EU, AU
ExistsUntilTilde, ForallUntilTilde = EUt, AUt

UNARY = (Not, EX, AX)
BINARY = (And, Or, EU, AU, EUt, AUt)
TEMPORAL = (EX, AX, EU, AU, EUt, AUt)


def children(f: Formula) -> tuple:
    if isinstance(f, UNARY):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def size(f: Formula) -> int:
    """Number of AST nodes."""
    return 1 + sum(size(c) for c in children(f))


def depth(f: Formula) -> int:
    """Height of the tree; leaves have depth 0."""
    cs = children(f)
    return 0 if not cs else 1 + max(depth(c) for c in cs)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal (children before parents), duplicates included."""
    for c in children(f):
        yield from subformulas(c)
    yield f


def atoms(f: Formula) -> tuple[str, ...]:
    """Atom names in first-occurrence (left-to-right) order."""
    seen: dict[str, None] = {}

    def walk(g):
        if isinstance(g, Atom):
            seen.setdefault(g.name, None)
        for c in children(g):
            walk(c)

    walk(f)
    return tuple(seen)


def is_enf(f: Formula) -> bool:
    """No A quantifier, no disjunction, no bare false."""
    return all(
        not isinstance(g, (Or, AX, AU, AUt, Bottom)) for g in subformulas(f)
    )


def is_pnf(f: Formula) -> bool:
    """Negation only directly above an atom or true; no bare false."""
    for g in subformulas(f):
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Not) and not isinstance(g.arg, (Atom, Top)):
            return False
    return True


def rebuild(f: Formula, kids: tuple) -> Formula:
    """Same node kind as ``f`` with new children."""
    if isinstance(f, UNARY):
        return type(f)(kids[0])
    if isinstance(f, BINARY):
        return type(f)(kids[0], kids[1])
    return f
