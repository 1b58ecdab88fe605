"""Seeded random formulas, operator trees and databases for testing and benchmarks."""

from __future__ import annotations

import random

from .ctl.formula import AU, AUt, AX, EU, EUt, EX, TOP, And, Atom, Formula, Not, Or, depth
from .kripke.database import RelationalDatabase
from .kripke.structure import KripkeStructure
from .operators import AndOp, AtomLeaf, NextOp, NotOp, TopLeaf, UntilOp, UntilTildeOp
from .std import StdProgram
from .symbols import SymbolTable

ENF_KINDS = (Not, And, EX, EU, EUt)
ALL_KINDS = (Not, And, Or, EX, AX, EU, AU, EUt, AUt)


def random_formula(
    rng: random.Random,
    max_depth: int,
    ap: tuple[str, ...] = ("p", "q"),
    kinds: tuple = ALL_KINDS,
    leaf_bias: float = 0.3,
) -> Formula:
    """A formula of depth at most ``max_depth`` built from ``kinds``.

    Leaves are atoms or ``true``; ``false`` is written as its negation so the
    result is in existential form whenever ``kinds`` allows it.
    """

    def gen(d: int) -> Formula:
        if d == 0 or rng.random() < leaf_bias:
            return TOP if rng.random() < 0.15 else Atom(rng.choice(ap))
        kind = rng.choice(kinds)
        if kind in (Not, EX, AX):
            return kind(gen(d - 1))
        return kind(gen(d - 1), gen(d - 1))

    return gen(max_depth)


def formula_corpus(
    count: int,
    max_depth: int,
    seed: int,
    ap: tuple[str, ...] = ("p", "q"),
    kinds: tuple = ALL_KINDS,
    require=None,
) -> list[Formula]:
    """``count`` distinct formulas; ``require`` filters candidates."""
    rng = random.Random(seed)
    out: dict[Formula, None] = {}
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 200 * count:
            raise RuntimeError("could not generate enough distinct formulas")
        f = random_formula(rng, max_depth, ap, kinds)
        if depth(f) <= max_depth and (require is None or require(f)):
            out.setdefault(f, None)
    return list(out)


def random_std(rng: random.Random, max_depth: int, n: int) -> StdProgram:
    """A random operator tree over ``P0 .. P{n-1}`` (``n >= 1``)."""

    def gen(d: int):
        if d == 0 or rng.random() < 0.3:
            return TopLeaf() if rng.random() < 0.15 else AtomLeaf(rng.randrange(n))
        kind = rng.choice((NotOp, AndOp, NextOp, UntilOp, UntilTildeOp))
        if kind in (NotOp, NextOp):
            return kind(gen(d - 1))
        return kind(gen(d - 1), gen(d - 1))

    return StdProgram(gen(max_depth), n, tuple(f"p{i}" for i in range(n)))


def random_database(
    rng: random.Random, max_constants: int, n: int, edge_prob: float = 0.3, unary_prob: float = 0.4
) -> RelationalDatabase:
    """A database over R and ``P0 .. P{n-1}``; R need not be total."""
    k = rng.randint(1, max_constants)
    names = [f"c{i}" for i in range(k)]
    r = [(a, b) for a in names for b in names if rng.random() < edge_prob]
    unary = [[a for a in names if rng.random() < unary_prob] for _ in range(n)]
    ap = tuple(f"p{i}" for i in range(n))
    return RelationalDatabase.build({"R": r}, unary, ap, symbols=SymbolTable(names))


def random_kripke(
    rng: random.Random,
    n_states: int,
    ap: tuple[str, ...] = ("p", "q"),
    max_outdegree: int | None = None,
) -> KripkeStructure:
    """A random total structure."""
    states = [f"s{i}" for i in range(n_states)]
    top = n_states if max_outdegree is None else min(max_outdegree, n_states)
    trans = []
    for s in states:
        for t in rng.sample(states, rng.randint(1, top)):
            trans.append((s, t))
    val = {s: [a for a in ap if rng.random() < 0.5] for s in states}
    return KripkeStructure.build(states, trans, val, ap)


def random_graph(rng: random.Random, n_edges: int, ap: tuple[str, ...] = ("p", "q")) -> KripkeStructure:
    """A total structure with about ``n_edges`` transitions and out-degree about 4."""
    import numpy as np

    n = max(1, n_edges // 4)
    gen = np.random.default_rng(rng.randrange(1 << 30))
    src = np.concatenate([np.arange(n), gen.integers(0, n, size=max(0, n_edges - n))])
    dst = gen.integers(0, n, size=src.size)
    labels = gen.random((n, len(ap))) < 0.5
    return KripkeStructure(SymbolTable.generated(n), src, dst, labels, ap)

