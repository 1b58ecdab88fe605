"""Bounded decision procedures built on the model checker.

Satisfiability and containment are decided by searching every total
structure up to a number of states, smallest first.  A formula with a model
has one with at most ``2**size(f)`` states, so a search that reaches that
bound is conclusive; verdicts record whether it did.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

import numpy as np

from .ctl.checker import model_check, truth_mask
from .ctl.formula import EU, TOP, And, Formula, Not, atoms, size
from .enumeration import batch, iter_codes
from .facts import FactStore
from .kripke.database import RelationalDatabase, db_to_kripke, domain_ids, kripke_to_db
from .kripke.structure import KripkeStructure
from .std import StdProgram, std_to_ctl

# structures checked together as one disjoint union
_BATCH = 50_000


@dataclass(frozen=True)
class Holds:
    """A positive answer.

    For satisfiability it carries the witness; for containment it records
    the bound searched without finding a counterexample.
    """

    structure: KripkeStructure | None = None
    state: str | None = None
    bound: int | None = None
    complete_at: int | None = None

    @property
    def complete(self) -> bool:
        return self.structure is not None or self.bound >= self.complete_at


@dataclass(frozen=True)
class CounterexampleFound:
    structure: KripkeStructure
    state: str
    database: RelationalDatabase | None = None


@dataclass(frozen=True)
class ExhaustedBound:
    """No witness with at most ``bound`` states; ``complete_at`` states would settle it."""

    bound: int
    complete_at: int

    @property
    def complete(self) -> bool:
        return self.bound >= self.complete_at


BoundedVerdict = Union[Holds, CounterexampleFound, ExhaustedBound]


def _complete_at(f: Formula) -> int:
    return 2 ** size(f)


def find_model(
    f: Formula, max_states: int, ap: tuple[str, ...] | None = None
) -> tuple[KripkeStructure, str] | None:
    """The first (structure, state) in enumeration order where ``f`` holds.

    Structures are visited by state count, then transition mask, then
    valuation mask; within a structure the lowest-numbered state wins.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    ap = tuple(ap) if ap is not None else atoms(f)
    for n in range(1, max_states + 1):
        codes = iter_codes(n, len(ap), min_states=n)
        while True:
            chunk = list(itertools.islice(codes, _BATCH))
            if not chunk:
                break
            b = batch(chunk, ap)
            hits = np.flatnonzero(truth_mask(b.union, f))
            if hits.size:
                s = int(hits[0])
                part = int(np.searchsorted(b.offsets, s, side="right") - 1)
                return b.part(part, ap), f"s{s - int(b.offsets[part])}"
    return None


def bounded_satisfiable(
    f: Formula, max_states: int, ap: tuple[str, ...] | None = None
) -> BoundedVerdict:
    """``Holds`` with the first witness, or ``ExhaustedBound``."""
    found = find_model(f, max_states, ap)
    if found is None:
        return ExhaustedBound(max_states, _complete_at(f))
    return Holds(found[0], found[1])


def bounded_contained(
    f1: Formula, f2: Formula, max_states: int, ap: tuple[str, ...] | None = None
) -> BoundedVerdict:
    """Search for a state satisfying ``f1`` but not ``f2``."""
    g = And(f1, Not(f2))
    found = find_model(g, max_states, ap)
    if found is None:
        return Holds(bound=max_states, complete_at=_complete_at(g))
    return CounterexampleFound(found[0], found[1])


def std_contained(p1: StdProgram, p2: StdProgram, max_states: int) -> BoundedVerdict:
    """Containment of goal relations over all databases, via the formulas.

    A counterexample also carries the database it induces.
    """
    n = max(p1.n, p2.n)
    names = tuple(p1.ap or p2.ap)
    names = names[:n] + tuple(f"p{i}" for i in range(len(names), n))
    v = bounded_contained(std_to_ctl(p1, names), std_to_ctl(p2, names), max_states, names)
    if isinstance(v, CounterexampleFound):
        return CounterexampleFound(v.structure, v.state, kripke_to_db(v.structure))
    return v


def evaluate_std_via_ctl(p: StdProgram, d: RelationalDatabase) -> FactStore:
    """Goal facts of ``flatten(p)`` on ``d``, computed by model checking.

    The database becomes a structure (closing off states without a
    successor) and the tree becomes a formula.  Returns a store holding
    only the goal relation ``G``.
    """
    out = FactStore(d.symbols)
    out.declare("G", 1)
    if domain_ids(d).size == 0:
        return out
    # relations the database lacks are empty: their atoms hold nowhere
    names = list(d.ap[: p.n])
    i = len(names)
    while len(names) < p.n:
        if f"p{i}" not in d.ap:
            names.append(f"p{i}")
        i += 1
    names = tuple(names)
    ap = tuple(d.ap) + names[len(d.ap):]
    k = db_to_kripke(d, ap)
    truth = model_check(k, std_to_ctl(p, names))
    if truth:
        out.add_facts("G", [(s,) for s in sorted(truth)])
    return out


def b_sat_reduction(phi: Formula, psi1: Formula) -> Formula:
    """``phi`` conjoined with "``psi1`` is unreachable".

    For the helper relation of an until-tilde sub-program with operands
    ``psi1`` and ``psi2`` and formula ``phi``, the helper is satisfiable
    exactly when the result is.
    """
    return And(phi, Not(EU(TOP, psi1)))


def replays(v: CounterexampleFound, f1: Formula, f2: Formula) -> bool:
    """Whether the model checker confirms a containment counterexample."""
    return v.state in model_check(v.structure, f1) and v.state not in model_check(v.structure, f2)
