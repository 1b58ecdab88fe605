"""Explicit-state CTL model checking over boolean state masks.

Each subformula is evaluated once, bottom up.  The until operators are
backward breadth-first searches over the predecessor lists, so one formula
costs time linear in the structure size per subformula.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..kripke.structure import KripkeStructure, StructureError
from .formula import (
    AU,
    AUt,
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
)


class ModelCheckError(ValueError):
    pass


def gather(indptr: np.ndarray, values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Concatenate ``values[indptr[v]:indptr[v+1]]`` over ``nodes``."""
    starts = indptr[nodes]
    counts = indptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return values[:0]
    offsets = np.cumsum(counts) - counts
    idx = np.repeat(starts - offsets, counts) + np.arange(total)
    return values[idx]


def ex(k: KripkeStructure, a: np.ndarray) -> np.ndarray:
    out = np.zeros(k.n, dtype=bool)
    out[k.src[a[k.dst]]] = True
    return out


@njit(cache=True)
def _eu_kernel(indptr, preds, a, b):
    result = b.copy()
    stack = np.flatnonzero(b)
    work = np.empty(a.size, dtype=np.int64)
    top = stack.size
    work[:top] = stack
    while top:
        top -= 1
        v = work[top]
        for i in range(indptr[v], indptr[v + 1]):
            u = preds[i]
            if a[u] and not result[u]:
                result[u] = True
                work[top] = u
                top += 1
    return result


@njit(cache=True)
def _eg_kernel(src, dst, indptr, preds, b):
    n = b.size
    alive = b.copy()
    count = np.zeros(n, dtype=np.int64)
    for e in range(src.size):
        if b[src[e]] and b[dst[e]]:
            count[src[e]] += 1
    work = np.empty(n, dtype=np.int64)
    top = 0
    for v in range(n):
        if alive[v] and count[v] == 0:
            alive[v] = False
            work[top] = v
            top += 1
    while top:
        top -= 1
        v = work[top]
        for i in range(indptr[v], indptr[v + 1]):
            u = preds[i]
            if alive[u]:
                count[u] -= 1
                if count[u] == 0:
                    alive[u] = False
                    work[top] = u
                    top += 1
    return alive


def eu(k: KripkeStructure, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Least set containing ``b`` and every ``a``-state with a successor in it.

    A backward search from ``b`` through ``a``-states, linear in the structure.
    """
    indptr, preds = k.backward
    return _eu_kernel(indptr, preds, a, b)


def eg(k: KripkeStructure, b: np.ndarray) -> np.ndarray:
    """States with an infinite path staying inside ``b``.

    Repeatedly discards ``b``-states that have no successor left in the set;
    what survives can always move to another survivor.
    """
    indptr, preds = k.backward
    return _eg_kernel(k.src, k.dst, indptr, preds, b)


def eut(k: KripkeStructure, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Some path keeps ``b`` up to and including the first ``a``, or forever."""
    return eu(k, b, (a & b) | eg(k, b))


def truth_mask(k: KripkeStructure, f: Formula, memo: dict | None = None) -> np.ndarray:
    """Boolean mask over state ids of the states satisfying ``f``.

    ``memo`` maps subformulas to masks already computed on ``k``; pass the
    same dict to share work between formulas over one structure.
    """
    if k.n == 0:
        raise ModelCheckError("empty structure")
    if not k.total:
        s = int(np.flatnonzero(k.out_degree == 0)[0])
        raise ModelCheckError(
            f"transition relation is not total: state {k.names.name(s)!r} has no successor"
        )
    if memo is None:
        memo = {}

    def ev(g: Formula) -> np.ndarray:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Top):
            r = np.ones(k.n, dtype=bool)
        elif isinstance(g, Bottom):
            r = np.zeros(k.n, dtype=bool)
        elif isinstance(g, Atom):
            try:
                r = k.labels[:, k.atom_index(g.name)].copy()
            except StructureError as e:
                raise ModelCheckError(str(e)) from None
        elif isinstance(g, Not):
            r = ~ev(g.arg)
        elif isinstance(g, And):
            r = ev(g.left) & ev(g.right)
        elif isinstance(g, Or):
            r = ev(g.left) | ev(g.right)
        elif isinstance(g, EX):
            r = ex(k, ev(g.arg))
        elif isinstance(g, AX):
            r = ~ex(k, ~ev(g.arg))
        elif isinstance(g, EU):
            r = eu(k, ev(g.left), ev(g.right))
        elif isinstance(g, EUt):
            r = eut(k, ev(g.left), ev(g.right))
        elif isinstance(g, AU):
            r = ~eut(k, ~ev(g.left), ~ev(g.right))
        elif isinstance(g, AUt):
            r = ~eu(k, ~ev(g.left), ~ev(g.right))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = r
        return r

    return ev(f)


def model_check(k: KripkeStructure, f: Formula) -> frozenset[str]:
    """Names of the states where ``f`` holds."""
    return k.state_names(np.flatnonzero(truth_mask(k, f)))
