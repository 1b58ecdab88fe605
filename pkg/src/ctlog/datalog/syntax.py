"""Datalog abstract syntax, with the counter extension used by successor programs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class CMax:
    """The symbolic counter bound, fixed when a program is evaluated."""


@dataclass(frozen=True)
class Pred:
    """Counter expression ``var - 1``."""

    var: Var


Term = Union[Var, Const, Int, CMax, Pred]
CMAX = CMax()


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False


@dataclass(frozen=True)
class Leq:
    """Constraint ``var <= bound``; ``bound`` is an Int or CMAX."""

    var: Var
    bound: Union[Int, CMax]


BodyItem = Union[Literal, Leq]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[BodyItem, ...] = ()

    def positive(self) -> Iterator[Atom]:
        for item in self.body:
            if isinstance(item, Literal) and not item.negated:
                yield item.atom

    def negative(self) -> Iterator[Atom]:
        for item in self.body:
            if isinstance(item, Literal) and item.negated:
                yield item.atom

    def atoms(self) -> Iterator[Atom]:
        for item in self.body:
            if isinstance(item, Literal):
                yield item.atom


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]
    goal: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.goal is None and self.rules:
            heads = self.idb()
            object.__setattr__(self, "goal", "G" if "G" in heads else self.rules[0].head.pred)

    def idb(self) -> set[str]:
        """Predicates defined by some rule."""
        return {r.head.pred for r in self.rules}

    def edb(self) -> set[str]:
        """Predicates used in bodies but never defined."""
        heads = self.idb()
        return {a.pred for r in self.rules for a in r.atoms() if a.pred not in heads}

    def predicates(self) -> set[str]:
        return self.idb() | self.edb()

    def __len__(self) -> int:
        return len(self.rules)


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Pred):
        yield t.var


def atom_vars(a: Atom) -> set[Var]:
    return {v for t in a.args for v in term_vars(t)}


def uses_counters(p: Program) -> bool:
    """Whether the program needs counter semantics (N-1 terms, bounds or cmax)."""
    for r in p.rules:
        for item in r.body:
            if isinstance(item, Leq):
                return True
        for a in (r.head, *r.atoms()):
            if any(isinstance(t, (Pred, CMax)) for t in a.args):
                return True
    return False
