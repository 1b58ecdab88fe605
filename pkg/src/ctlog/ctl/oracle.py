"""Brute-force CTL semantics, used to cross-check the model checker.

Path quantifiers are evaluated by listing every simple lasso from a state: a
sequence of distinct states followed by one edge back into the sequence.  On a
finite total structure a path with a given until/release property exists iff
some simple lasso has it (cut the witness at its first repeated state), so
these finitely many ultimately periodic paths decide E and A alike.
"""

from __future__ import annotations

from functools import lru_cache

from ..kripke.structure import KripkeStructure
from .formula import (
    AU,
    AX,
    EU,
    EUt,
    EX,
    And,
    Atom,
    Bottom,
    Formula,
    Not,
    Or,
    Top,
    atoms,
)

DEFAULT_BOUND = 6


class OracleBoundError(ValueError):
    pass


def lassos(succ: dict[str, list[str]], start: str) -> list[tuple[tuple[str, ...], int]]:
    """All simple lassos from ``start`` as ``(states, loop_index)``.

    The path visits ``states`` in order and then jumps back to
    ``states[loop_index]`` forever.
    """
    out = []

    def walk(path: list[str], pos: dict[str, int]):
        for t in succ[path[-1]]:
            if t in pos:
                out.append((tuple(path), pos[t]))
            else:
                pos[t] = len(path)
                path.append(t)
                walk(path, pos)
                path.pop()
                del pos[t]

    walk([start], {start: 0})
    return out


def _positions(n: int, loop: int):
    """Positions 0, 1, ... of a lasso, each visited once."""
    i = 0
    seen = set()
    while i not in seen:
        seen.add(i)
        yield i
        i = i + 1 if i + 1 < n else loop


def _until(path, loop, holds1, holds2) -> bool:
    for i in _positions(len(path), loop):
        if holds2(path[i]):
            return True
        if not holds1(path[i]):
            return False
    return False


def _release(path, loop, holds1, holds2) -> bool:
    for i in _positions(len(path), loop):
        if not holds2(path[i]):
            return False
        if holds1(path[i]):
            return True
    return True


def _next(path, loop, holds) -> bool:
    return holds(path[1] if len(path) > 1 else path[loop])


def truth_oracle(k: KripkeStructure, f: Formula, bound: int = DEFAULT_BOUND) -> frozenset[str]:
    if k.n > bound:
        raise OracleBoundError(f"structure has {k.n} states; oracle bound is {bound}")
    succ = {s: sorted(k.successors(s)) for s in k.states}
    if any(not v for v in succ.values()):
        raise OracleBoundError("transition relation is not total")
    val = k.valuation
    for a in atoms(f):
        if a not in k.ap:
            raise OracleBoundError(f"atom {a!r} is not declared by the structure")
    paths = {s: lassos(succ, s) for s in k.states}

    @lru_cache(maxsize=None)
    def holds(g: Formula, s: str) -> bool:
        if isinstance(g, Top):
            return True
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Atom):
            return g.name in val[s]
        if isinstance(g, Not):
            return not holds(g.arg, s)
        if isinstance(g, And):
            return holds(g.left, s) and holds(g.right, s)
        if isinstance(g, Or):
            return holds(g.left, s) or holds(g.right, s)
        if isinstance(g, (EX, AX)):
            check = lambda p: _next(p[0], p[1], lambda t: holds(g.arg, t))
        else:
            h1 = lambda t: holds(g.left, t)
            h2 = lambda t: holds(g.right, t)
            op = _until if isinstance(g, (EU, AU)) else _release
            check = lambda p: op(p[0], p[1], h1, h2)
        if isinstance(g, (EX, EU, EUt)):
            return any(check(p) for p in paths[s])
        return all(check(p) for p in paths[s])

    return frozenset(s for s in k.states if holds(f, s))
