"""Bottom-up evaluation of stratified Datalog, columnar and semi-naive.

Every relation is a sorted array of distinct int64 keys; a tuple's key is its
mixed-radix encoding, with radix "number of constants" for constant columns
and "largest counter + 2" for counter columns.  Rule bodies are evaluated as
a sequence of vectorized joins over binding columns.  Lookups on a subset of
columns go through a sorted secondary index built on demand and cached on
the relation (EDB indexes are cached on the input fact store, so repeated
evaluations over one database share them).

Radices are then rounded up to powers of two, when the key still fits in 62
bits, so columns decode with shifts.

Join order is left to right as written, with two adjustments: in a
semi-naive step the delta literal is joined first, and after that the next
literal is the first one that shares an already bound variable.  Negated
literals and constraints are applied as soon as their variables are bound.

A few common rule shapes skip the general join: intersections of unary
relations become bitmap operations, an edge filtered at its ends is one
numba pass, and a linear transitive closure is computed by a per-source
search that emits sorted keys.  Results of sub-programs are cached per
fact store, keyed by a structural signature, so evaluating many programs
over one large database reuses shared helpers.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from ..facts import FactStore
from ..symbols import SymbolTable
from .analysis import (
    COUNTER,
    ProgramError,
    Stratification,
    argument_sorts,
    check_arities,
    check_safety,
    check_stratification,
    evaluation_order,
)
from .syntax import (
    CMax,
    Const,
    Int,
    Leq,
    Literal,
    Pred,
    Program,
    Rule,
    Var,
    atom_vars,
    uses_counters,
)

_MAX_KEY = 1 << 62


class EvaluationError(ValueError):
    pass


@njit(cache=True)
def _expand_kernel(lo, counts, total):
    owner = np.empty(total, dtype=np.int64)
    pos = np.empty(total, dtype=np.int64)
    k = 0
    for i in range(lo.size):
        start = lo[i]
        for j in range(counts[i]):
            owner[k] = i
            pos[k] = start + j
            k += 1
    return owner, pos


@njit(cache=True)
def _range_kernel(starts, probe):
    """Owner and index position of every match, reading ranges from ``starts``."""
    total = 0
    for i in range(probe.size):
        total += starts[probe[i] + 1] - starts[probe[i]]
    owner = np.empty(total, dtype=np.int64)
    pos = np.empty(total, dtype=np.int64)
    k = 0
    for i in range(probe.size):
        for j in range(starts[probe[i]], starts[probe[i] + 1]):
            owner[k] = i
            pos[k] = j
            k += 1
    return owner, pos


def _expand(lo: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For ranges ``[lo[i], lo[i]+counts[i])``: owner index and position of each element."""
    total = int(counts.sum())
    return _expand_kernel(lo.astype(np.int64, copy=False), counts.astype(np.int64, copy=False), total)


class Relation:
    """Sorted distinct keys over a fixed list of column radices."""

    __slots__ = ("radices", "keys", "_cols", "_index", "_starts", "_mask", "_by")

    def __init__(self, radices: tuple[int, ...], keys: np.ndarray):
        self.radices = radices
        self.keys = keys
        self._cols: dict[int, np.ndarray] = {}
        self._index: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray | None]] = {}
        self._starts: dict[tuple[int, ...], np.ndarray | None] = {}
        self._mask: np.ndarray | None = None
        self._by: dict[tuple, np.ndarray] = {}

    @property
    def arity(self) -> int:
        return len(self.radices)

    def __len__(self) -> int:
        return self.keys.size

    def col(self, j: int) -> np.ndarray:
        c = self._cols.get(j)
        if c is None:
            below = 1
            for r in self.radices[j + 1 :]:
                below *= r
            r = self.radices[j]
            if below & (below - 1) == 0 and r & (r - 1) == 0:
                # power-of-two radices decode with shifts
                c = (self.keys >> (below.bit_length() - 1)) & (r - 1)
            else:
                c = (self.keys // below) % r if below > 1 else self.keys % r
            self._cols[j] = c
        return c

    def rows(self) -> np.ndarray:
        if self.arity == 0:
            return np.empty((self.keys.size, 0), dtype=np.int64)
        return np.stack([self.col(j) for j in range(self.arity)], axis=1)

    def mask(self) -> np.ndarray:
        """Membership bitmap (unary relations only)."""
        if self._mask is None:
            m = np.zeros(self.radices[0], dtype=bool)
            m[self.keys] = True
            self._mask = m
        return self._mask

    def index(self, cols: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray | None]:
        """Sorted sub-keys over ``cols`` and the permutation into ``keys``."""
        hit = self._index.get(cols)
        if hit is not None:
            return hit
        if cols == tuple(range(len(cols))):
            # a prefix of the columns: keys are already sorted by it
            below = 1
            for r in self.radices[len(cols) :]:
                below *= r
            hit = (self.keys // below if below > 1 else self.keys, None)
        else:
            sub = encode([self.col(j) for j in cols], [self.radices[j] for j in cols])
            perm = np.argsort(sub, kind="stable")
            hit = (sub[perm], perm)
        self._index[cols] = hit
        return hit

    def col_by(self, cols: tuple[int, ...], j: int) -> np.ndarray:
        """Column ``j`` listed in the order of the index over ``cols``."""
        c = self._by.get((cols, j))
        if c is None:
            _, perm = self.index(cols)
            c = self.col(j) if perm is None else self.col(j)[perm]
            self._by[(cols, j)] = c
        return c

    def starts(self, cols: tuple[int, ...]) -> np.ndarray | None:
        """Offsets of each sub-key value in the sorted index, when that table is small.

        With it a lookup is two gathers instead of two binary searches.
        """
        if cols in self._starts:
            return self._starts[cols]
        span = 1
        for j in cols:
            span *= self.radices[j]
        out = None
        if span <= 4 * self.keys.size + 4096:
            sub, _ = self.index(cols)
            out = np.zeros(span + 1, dtype=np.int64)
            np.cumsum(np.bincount(sub, minlength=span), out=out[1:])
        self._starts[cols] = out
        return out


def encode(columns: list[np.ndarray], radices: list[int]) -> np.ndarray:
    if not columns:
        return np.zeros(0, dtype=np.int64)
    key = np.asarray(columns[0], dtype=np.int64)
    for c, r in zip(columns[1:], radices[1:]):
        key = key * r + c
    return key


def _empty_keys() -> np.ndarray:
    return np.empty(0, dtype=np.int64)


@dataclass
class _Context:
    radices: dict[str, tuple[int, ...]]
    const_ids: dict[str, int]
    c_max: int | None
    counter_cols: dict[str, frozenset[int]]


# -- one rule -------------------------------------------------------------------


_Bindings = dict[Var, np.ndarray]


def _scalar(t, ctx: _Context) -> int | None:
    if isinstance(t, Const):
        return ctx.const_ids.get(t.name, -1)
    if isinstance(t, Int):
        return t.value
    if isinstance(t, CMax):
        return ctx.c_max
    return None


def _probe(atom, binds: _Bindings, m: int, ctx: _Context):
    """Split an atom's columns into bound probes and free outputs."""
    bound_cols, values, free = [], [], []
    impossible = risky = False
    for j, t in enumerate(atom.args):
        s = _scalar(t, ctx)
        if s is not None:
            if s < 0:
                impossible = True
            bound_cols.append(j)
            values.append(np.full(m, s, dtype=np.int64))
        elif isinstance(t, Var):
            if t in binds:
                bound_cols.append(j)
                values.append(binds[t])
            else:
                free.append((j, t, 0))
        else:  # Pred: column value is var - 1
            if t.var in binds:
                bound_cols.append(j)
                values.append(binds[t.var] - 1)
                risky = True
            else:
                free.append((j, t.var, 1))
    # only ``N-1`` can fall outside a column's range (variables hold values
    # of their own sort, literals are below the counter radix)
    return bound_cols, values, free, impossible, risky


def _lookup(rel: Relation, bound_cols, values, m, risky=True):
    """Owner binding and matching position for each match, plus the order
    ``pos`` refers to: the index columns whose ``col_by`` it addresses, or
    ``()`` for plain key order.

    ``pos`` is None when it is the identity (a scan for a single binding).
    """
    if not bound_cols:
        n = len(rel)
        if m == 1:
            return np.zeros(n, dtype=np.int64), None, ()
        return np.repeat(np.arange(m), n), np.tile(np.arange(n), m), ()
    radices = [rel.radices[j] for j in bound_cols]
    owners_base = None
    if risky:
        inrange = np.ones(m, dtype=bool)
        for v, r in zip(values, radices):
            inrange &= (v >= 0) & (v < r)
        if not inrange.all():
            values = [v[inrange] for v in values]
            owners_base = np.flatnonzero(inrange)
    if len(bound_cols) == rel.arity == 1 and rel.radices[0] > 0:
        hit = rel.mask()[values[0]]
        owner = np.flatnonzero(hit)
        pos = np.searchsorted(rel.keys, values[0][owner])
        order = ()
    else:
        order = tuple(bound_cols)
        probe = encode(values, radices)
        starts = rel.starts(order)
        if starts is not None:
            owner, pos = _range_kernel(starts, probe)
        else:
            sub, _ = rel.index(order)
            lo = np.searchsorted(sub, probe, side="left")
            hi = np.searchsorted(sub, probe, side="right")
            owner, pos = _expand(lo, hi - lo)
    if owners_base is not None:
        owner = owners_base[owner]
    return owner, pos, order


def _contains(rel: Relation, atom, binds: _Bindings, m: int, ctx: _Context) -> np.ndarray:
    bound_cols, values, free, impossible, risky = _probe(atom, binds, m, ctx)
    assert not free, "negated literal with unbound variables"
    if impossible or len(rel) == 0:
        return np.zeros(m, dtype=bool)
    if rel.arity == 0:
        return np.ones(m, dtype=bool)
    if not risky:
        if rel.arity == 1:
            return rel.mask()[values[0]]
        probe = encode(values, list(rel.radices))
        idx = np.searchsorted(rel.keys, probe)
        idx[idx >= rel.keys.size] = 0
        return rel.keys[idx] == probe
    ok = np.ones(m, dtype=bool)
    for v, r in zip(values, rel.radices):
        ok &= (v >= 0) & (v < r)
    if rel.arity == 1:
        out = np.zeros(m, dtype=bool)
        out[ok] = rel.mask()[values[0][ok]]
        return out
    probe = encode([v[ok] for v in values], list(rel.radices))
    idx = np.searchsorted(rel.keys, probe)
    idx[idx >= rel.keys.size] = 0
    out = np.zeros(m, dtype=bool)
    out[ok] = rel.keys[idx] == probe
    return out


def _plan(rule: Rule, first: int | None) -> list[int]:
    """Order of body items: delta literal first, then connected left to right."""
    body = rule.body
    todo = list(range(len(body)))
    order: list[int] = []
    bound: set[Var] = set()

    def place(i):
        order.append(i)
        todo.remove(i)
        item = body[i]
        if isinstance(item, Literal) and not item.negated:
            bound.update(atom_vars(item.atom))

    def flush_filters():
        for i in list(todo):
            item = body[i]
            if isinstance(item, Leq):
                if item.var in bound:
                    place(i)
            elif item.negated and atom_vars(item.atom) <= bound:
                place(i)

    if first is not None:
        place(first)
    flush_filters()
    while todo:
        positives = [i for i in todo if isinstance(body[i], Literal) and not body[i].negated]
        if not positives:
            raise EvaluationError("rule has filters over unbound variables")
        pick = next((i for i in positives if atom_vars(body[i].atom) & bound), positives[0])
        place(pick)
        flush_filters()
    return order


def _mask_rule(rule: Rule, rels: dict[str, Relation], delta_at, delta, ctx) -> np.ndarray | None:
    """Membership mask for a rule that only intersects unary relations on one variable."""
    head = rule.head
    if len(head.args) != 1 or not isinstance(head.args[0], Var):
        return None
    radices = ctx.radices[head.pred]
    pos, neg = [], []
    for i, item in enumerate(rule.body):
        if not isinstance(item, Literal) or item.atom.args != head.args:
            return None
        rel = delta if i == delta_at else rels[item.atom.pred]
        if rel.radices != radices:
            return None
        (neg if item.negated else pos).append(rel)
    if not pos:
        return None
    if any(len(r) == 0 for r in pos):
        return _empty_keys()
    out = pos[0].mask().copy()
    for r in pos[1:]:
        out &= r.mask()
    for r in neg:
        if len(r):
            out &= ~r.mask()
    return out


@njit(cache=True)
def _edge_mask(xs, ys, mx, my, use_x, use_y, head_x, size):
    out = np.zeros(size, dtype=np.bool_)
    for e in range(xs.size):
        if use_x and not mx[xs[e]]:
            continue
        if use_y and not my[ys[e]]:
            continue
        out[xs[e] if head_x else ys[e]] = True
    return out


@njit(cache=True)
def _edge_keep(xs, ys, mx, my, use_x, use_y):
    keep = np.empty(xs.size, dtype=np.bool_)
    for e in range(xs.size):
        keep[e] = (not use_x or mx[xs[e]]) and (not use_y or my[ys[e]])
    return keep


def _edge_rule(rule: Rule, rels: dict[str, Relation], delta_at, delta, ctx) -> np.ndarray | None:
    """One pass over a binary relation for rules that filter its two ends by unary literals.

    Covers heads over one end (returned as a mask) or over both ends in the
    same order (returned as keys).  Declines when some positive unary
    literal is small enough that driving the join from it is cheaper.
    """
    edge = None
    unary = []
    for i, item in enumerate(rule.body):
        if not isinstance(item, Literal):
            return None
        args = item.atom.args
        rel = delta if i == delta_at else rels[item.atom.pred]
        if len(args) == 2 and not item.negated and edge is None:
            if not (isinstance(args[0], Var) and isinstance(args[1], Var)) or args[0] == args[1]:
                return None
            edge = (args, rel)
        elif len(args) == 1 and isinstance(args[0], Var):
            unary.append((args[0], item.negated, rel))
        else:
            return None
    if edge is None:
        return None
    (a, b), brel = edge
    head = rule.head.args
    if head not in ((a,), (b,), (a, b)):
        return None
    radices = ctx.radices[rule.head.pred]
    if len(head) == 1 and radices[0] != brel.radices[0 if head == (a,) else 1]:
        return None
    if len(brel) == 0:
        return _empty_keys()
    masks = {a: None, b: None}
    for var, negated, rel in unary:
        if var not in masks:
            return None
        radix = brel.radices[0 if var == a else 1]
        if rel.radices != (radix,):
            return None
        if negated:
            if not len(rel):
                continue
            m = ~rel.mask()
        else:
            if 8 * len(rel) < len(brel):
                return None
            m = rel.mask()
        masks[var] = m if masks[var] is None else masks[var] & m
    dummy = np.zeros(1, dtype=np.bool_)
    mx, my = masks[a], masks[b]
    xs, ys = brel.col(0), brel.col(1)
    args = (xs, ys, dummy if mx is None else mx, dummy if my is None else my, mx is not None, my is not None)
    if len(head) == 1:
        return _edge_mask(*args, head == (a,), radices[0])
    keep = _edge_keep(*args)
    if radices == brel.radices:
        return brel.keys[keep]
    return encode([xs[keep], ys[keep]], list(radices))


def _fire(rule: Rule, order: list[int], rels: dict[str, Relation], delta_at, delta, ctx) -> np.ndarray:
    """Keys of head tuples derived by one rule (may contain duplicates).

    Rules that only intersect unary relations return a boolean mask instead.
    """
    fast = _mask_rule(rule, rels, delta_at, delta, ctx)
    if fast is None:
        fast = _edge_rule(rule, rels, delta_at, delta, ctx)
    if fast is not None:
        return fast
    binds: _Bindings = {}
    m = 1
    # variables still needed after each step; others are dropped early
    live_after = []
    need = set(atom_vars(rule.head))
    for i in reversed(order):
        live_after.append(frozenset(need))
        item = rule.body[i]
        need |= {item.var} if isinstance(item, Leq) else atom_vars(item.atom)
    live_after.reverse()
    for step, i in enumerate(order):
        item = rule.body[i]
        live = live_after[step]
        if isinstance(item, Leq):
            bound = ctx.c_max if isinstance(item.bound, CMax) else item.bound.value
            keep = binds[item.var] <= bound
        elif item.negated:
            keep = ~_contains(rels[item.atom.pred], item.atom, binds, m, ctx)
        else:
            rel = delta if i == delta_at else rels[item.atom.pred]
            bound_cols, values, free, impossible, risky = _probe(item.atom, binds, m, ctx)
            if impossible or len(rel) == 0:
                return _empty_keys()
            if not free and binds:
                # every column bound: a membership test, at most one match each
                keep = _contains(rel, item.atom, binds, m, ctx)
                binds = {v: a[keep] for v, a in binds.items() if v in live}
                m = int(keep.sum())
                if m == 0:
                    return _empty_keys()
                continue
            owner, pos, by = _lookup(rel, bound_cols, values, m, risky)
            binds = {v: a[owner] for v, a in binds.items() if v in live}
            m = owner.size
            seen: dict[Var, np.ndarray] = {}
            keep = None
            for j, var, offset in free:
                vals = rel.col(j) if pos is None else rel.col_by(by, j)[pos]
                if offset:
                    vals = vals + offset
                if var in seen:
                    eq = seen[var] == vals
                    keep = eq if keep is None else keep & eq
                else:
                    seen[var] = vals
            binds.update((v, a) for v, a in seen.items() if v in live)
            if keep is None:
                if m == 0:
                    return _empty_keys()
                continue
        binds = {v: a[keep] for v, a in binds.items() if v in live}
        m = int(keep.sum())
        if m == 0:
            return _empty_keys()
    head = rule.head
    radices = ctx.radices[head.pred]
    cols = []
    valid = None
    counters = ctx.counter_cols.get(head.pred, frozenset())
    for j, t in enumerate(head.args):
        s = _scalar(t, ctx)
        col = np.full(m, s, dtype=np.int64) if s is not None else binds[t]
        if j in counters and ctx.c_max is not None:
            ok = (col >= 1) & (col <= ctx.c_max)
            valid = ok if valid is None else valid & ok
        cols.append(col)
    if valid is not None:
        cols = [c[valid] for c in cols]
    if not cols:
        return np.zeros(1 if m else 0, dtype=np.int64)
    return encode(cols, list(radices))


# -- fixpoints ------------------------------------------------------------------


def _merge(old: Relation, found: list[np.ndarray]) -> tuple[Relation, Relation]:
    """Add derived keys (or, for unary relations, membership masks).

    Returns the new full relation and the delta.
    """
    found = [f for f in found if f.size]
    if not found:
        return old, Relation(old.radices, _empty_keys())
    if old.arity == 1:
        fresh = None
        for f in found:
            if f.dtype == np.bool_:
                fresh = f.copy() if fresh is None else fresh | f
        if fresh is None:
            fresh = np.zeros(old.radices[0], dtype=bool)
        for f in found:
            if f.dtype != np.bool_:
                fresh[f] = True
        mask = old.mask() if len(old) else None
        if mask is not None:
            fresh &= ~mask
        delta_keys = np.flatnonzero(fresh)
        if delta_keys.size == 0:
            return old, Relation(old.radices, _empty_keys())
        full_mask = fresh.copy() if mask is None else mask | fresh
        full = Relation(old.radices, delta_keys if mask is None else np.flatnonzero(full_mask))
        full._mask = full_mask
        delta = Relation(old.radices, delta_keys)
        delta._mask = fresh
        return full, delta
    cand = np.concatenate(found) if len(found) > 1 else found[0]
    # derived keys often arrive in long sorted runs, which timsort exploits
    cand = np.sort(cand, kind="stable")
    keys, fresh = _union_kernel(old.keys, cand)
    if fresh.size == 0:
        return old, Relation(old.radices, _empty_keys())
    if fresh.size == keys.size:
        return Relation(old.radices, fresh), Relation(old.radices, fresh)
    return Relation(old.radices, keys), Relation(old.radices, fresh)


@njit(cache=True)
def _union_kernel(old, cand):
    """Merge sorted distinct ``old`` with sorted ``cand`` (duplicates allowed).

    Returns the merged keys and the keys of ``cand`` missing from ``old``.
    """
    out = np.empty(old.size + cand.size, dtype=np.int64)
    fresh = np.empty(cand.size, dtype=np.int64)
    i = j = k = f = 0
    while j < cand.size:
        b = cand[j]
        j += 1
        if j < cand.size and cand[j] == b:
            continue
        while i < old.size and old[i] < b:
            out[k] = old[i]
            i += 1
            k += 1
        if i < old.size and old[i] == b:
            continue
        out[k] = b
        k += 1
        fresh[f] = b
        f += 1
    while i < old.size:
        out[k] = old[i]
        i += 1
        k += 1
    return out[:k], fresh[:f]


@njit(cache=True)
def _closure_kernel(s_off, s_dst, b_off, b_dst, sx, su, bx, by, r):
    """Keys of x*r+y, ascending, for every step path from x ending in a base edge to y."""
    out = np.empty(max(16, 2 * b_dst.size), dtype=np.int64)
    n = 0
    seen = np.full(r, -1, dtype=np.int64)
    hit = np.full(r, -1, dtype=np.int64)
    stack = np.empty(r, dtype=np.int64)
    ys = np.empty(r, dtype=np.int64)
    for x in range(r):
        if not sx[x] and not bx[x]:
            continue
        seen[x] = x
        stack[0] = x
        top = 1
        m = 0
        while top:
            top -= 1
            v = stack[top]
            if bx[v]:
                for e in range(b_off[v], b_off[v + 1]):
                    y = b_dst[e]
                    if by[y] and hit[y] != x:
                        hit[y] = x
                        ys[m] = y
                        m += 1
            if sx[v]:
                for e in range(s_off[v], s_off[v + 1]):
                    w = s_dst[e]
                    if su[w] and seen[w] != x:
                        seen[w] = x
                        stack[top] = w
                        top += 1
        if m == 0:
            continue
        if n + m > out.size:
            grown = np.empty(max(2 * out.size, n + m), dtype=np.int64)
            grown[:n] = out[:n]
            out = grown
        if m > 32:
            ys[:m] = np.sort(ys[:m])
        else:
            for i in range(1, m):
                v = ys[i]
                j = i - 1
                while j >= 0 and ys[j] > v:
                    ys[j + 1] = ys[j]
                    j -= 1
                ys[j + 1] = v
        for i in range(m):
            out[n + i] = x * r + ys[i]
        n += m
    return out[:n]


def _closure_parts(rule: Rule, head_vars, rec: str | None):
    """Split a rule body into its edge atom, recursive atom and unary filters per variable."""
    edge = recur = None
    filters: dict[Var, list] = {}
    for item in rule.body:
        if not isinstance(item, Literal):
            return None
        args = item.atom.args
        if not all(isinstance(a, Var) for a in args):
            return None
        if len(args) == 2 and not item.negated:
            if item.atom.pred == rec and recur is None:
                recur = item.atom
            elif item.atom.pred != rec and edge is None:
                edge = item.atom
            else:
                return None
        elif len(args) == 1:
            filters.setdefault(args[0], []).append(item)
        else:
            return None
    return edge, recur, filters


def _closure_group(program: Program, pred: str, rels: dict[str, Relation], ctx) -> bool:
    """Evaluate a linear transitive-closure predicate directly, if it has that shape.

    The shape is one base rule ``P(X,Y) :- E(X,Y), <unary filters on X, Y>``
    and one step rule ``P(X,Y) :- F(X,U), P(U,Y), <unary filters on X, U>``.
    Keys come out sorted, so no merge rounds are needed.
    """
    rules = [r for r in program.rules if r.head.pred == pred]
    radices = ctx.radices[pred]
    if len(rules) != 2 or len(radices) != 2 or radices[0] != radices[1] or ctx.counter_cols.get(pred):
        return False
    parts = {}
    for r in rules:
        head = r.head.args
        if not all(isinstance(a, Var) for a in head) or head[0] == head[1]:
            return False
        got = _closure_parts(r, head, pred)
        if got is None or got[0] is None:
            return False
        parts["step" if got[1] is not None else "base"] = (head, got)
    if set(parts) != {"base", "step"}:
        return False
    (x, y), (edge, _, bfil) = parts["base"]
    if edge.args != (x, y) or set(bfil) - {x, y}:
        return False
    (sx_var, sy_var), (sedge, recur, sfil) = parts["step"]
    u = sedge.args[1]
    if sedge.args[0] != sx_var or recur.args != (u, sy_var) or u in (sx_var, sy_var) or set(sfil) - {sx_var, u}:
        return False
    r = radices[0]
    erel, srel = rels[edge.pred], rels[sedge.pred]
    if erel.radices != radices or srel.radices != radices:
        return False

    def mask(items):
        m = np.ones(r, dtype=np.bool_)
        for item in items or ():
            rel = rels[item.atom.pred]
            if rel.radices != (r,):
                return None
            if item.negated:
                if len(rel):
                    m &= ~rel.mask()
            else:
                m &= rel.mask() if len(rel) else False
        return m

    masks = [mask(bfil.get(x)), mask(bfil.get(y)), mask(sfil.get(sx_var)), mask(sfil.get(u))]
    if any(m is None for m in masks):
        return False
    bx, by, sx, su = masks

    def csr(rel):
        off = rel.starts((0,))
        if off is None:
            off = np.searchsorted(rel.col(0), np.arange(r + 1))
        return off, rel.col(1)

    b_off, b_dst = csr(erel)
    s_off, s_dst = csr(srel)
    rels[pred] = Relation(radices, _closure_kernel(s_off, s_dst, b_off, b_dst, sx, su, bx, by, r))
    return True


def _evaluate_group(program: Program, group: list[str], rels: dict[str, Relation], ctx) -> None:
    if len(group) == 1 and _closure_group(program, group[0], rels, ctx):
        return
    members = set(group)
    rules = [r for r in program.rules if r.head.pred in members]
    recursive_at = {
        id(r): [
            i
            for i, item in enumerate(r.body)
            if isinstance(item, Literal) and not item.negated and item.atom.pred in members
        ]
        for r in rules
    }
    for p in group:
        rels[p] = Relation(ctx.radices[p], _empty_keys())
    found: dict[str, list[np.ndarray]] = {p: [] for p in group}
    for r in rules:
        if not recursive_at[id(r)]:
            found[r.head.pred].append(_fire(r, _plan(r, None), rels, None, None, ctx))
    deltas = {}
    for p in group:
        rels[p], deltas[p] = _merge(rels[p], found[p])
    plans: dict[tuple[int, int], list[int]] = {}
    while any(len(d) for d in deltas.values()):
        found = {p: [] for p in group}
        for ri, r in enumerate(rules):
            for i in recursive_at[id(r)]:
                d = deltas[r.body[i].atom.pred]
                if not len(d):
                    continue
                order = plans.get((ri, i))
                if order is None:
                    order = plans[(ri, i)] = _plan(r, i)
                found[r.head.pred].append(_fire(r, order, rels, i, d, ctx))
        for p in group:
            rels[p], deltas[p] = _merge(rels[p], found[p])


# -- entry points -----------------------------------------------------------------


def _facts_of(d) -> FactStore:
    return d.facts if hasattr(d, "facts") and not isinstance(d, FactStore) else d


def _edb_relation(facts: FactStore, pred: str, radices: tuple[int, ...]) -> Relation:
    cache = facts.__dict__.setdefault("_engine_cache", {})
    key = (pred, radices)
    rel = cache.get(key)
    if rel is None:
        rows = facts.relation(pred)
        if rows.shape[0] == 0:
            keys = _empty_keys()
        else:
            for j, r in enumerate(radices):
                if rows[:, j].min() < 0 or rows[:, j].max() >= r:
                    raise EvaluationError(f"value out of range in {pred}")
            keys = encode([rows[:, j] for j in range(len(radices))], list(radices))
            if radices:
                keys = np.unique(keys)
            else:
                keys = np.zeros(1, dtype=np.int64)
        rel = Relation(radices, keys)
        cache[key] = rel
    return rel


class _ViewCache:
    """Derived relations of earlier evaluations over the same fact store.

    A group of predicates is identified by its rules, with every lower IDB
    predicate replaced by the identity of its own defining rules, so two
    programs that share a sub-program (under any predicate names) share its
    result.  Least-recently-used entries are dropped beyond a total size.
    """

    LIMIT = 40_000_000  # keys kept across all cached relations

    def __init__(self):
        self.entries: OrderedDict = OrderedDict()
        self.ids: dict = {}
        self.size = 0

    @classmethod
    def of(cls, facts: FactStore) -> "_ViewCache":
        cache = facts.__dict__.setdefault("_engine_cache", {})
        views = cache.get("views")
        if views is None:
            views = cache["views"] = cls()
        return views

    def intern(self, obj) -> int:
        return self.ids.setdefault(obj, len(self.ids))

    def signature(self, program: Program, group: list[str], sigs: dict[str, int], ctx):
        local = {p: i for i, p in enumerate(group)}

        def name(pred):
            if pred in local:
                return ("self", local[pred])
            if pred in sigs:
                return ("view", sigs[pred])
            return ("edb", pred)

        def atom(a):
            return (name(a.pred), a.args)

        rules = []
        for r in program.rules:
            if r.head.pred in local:
                body = tuple(
                    ("leq", it.var, it.bound) if isinstance(it, Leq) else (it.negated, atom(it.atom))
                    for it in r.body
                )
                rules.append((atom(r.head), body))
        radices = tuple(ctx.radices[p] for p in group)
        return self.intern((tuple(rules), radices, ctx.c_max))

    def get(self, key):
        hit = self.entries.get(key)
        if hit is not None:
            self.entries.move_to_end(key)
        return hit

    def put(self, key, rels: list[Relation]) -> None:
        weight = sum(len(r) for r in rels)
        if weight > self.LIMIT // 4:
            return
        self.entries[key] = rels
        self.size += weight
        while self.size > self.LIMIT and self.entries:
            _, old = self.entries.popitem(last=False)
            self.size -= sum(len(r) for r in old)


def _prepare(program: Program, facts: FactStore, c_max: int | None, strat: Stratification | None):
    arity = check_arities(program)
    check_safety(program)
    idb = program.idb()
    for pred in facts.predicates():
        if pred in idb:
            raise ProgramError(f"EDB/IDB name collision: {pred} is both a fact and a rule head")
        if pred in arity and facts.arity(pred) != arity[pred]:
            raise ProgramError(
                f"arity mismatch: {pred} has arity {facts.arity(pred)} in the facts "
                f"and {arity[pred]} in the program"
            )
    edb_counters = {p: facts.counter_cols(p) for p in facts.predicates() if facts.counter_cols(p)}
    sorts = argument_sorts(program, edb_counters)
    for pred in facts.predicates():
        if pred in arity:
            for j in range(arity[pred]):
                if sorts.get((pred, j)) == COUNTER and j not in facts.counter_cols(pred):
                    raise ProgramError(f"argument {j + 1} of {pred} holds constants, not counters")
    # constants named in rules but absent from the data get fresh ids
    symbols = facts.symbols
    extra: list[str] = []
    for r in program.rules:
        for a in (r.head, *r.atoms()):
            for t in a.args:
                if isinstance(t, Const) and symbols.lookup(t.name) is None and t.name not in extra:
                    extra.append(t.name)
    if extra:
        symbols = SymbolTable(symbols.names())
        for name in extra:
            symbols.intern(name)
    const_ids = {}
    for r in program.rules:
        for a in (r.head, *r.atoms()):
            for t in a.args:
                if isinstance(t, Const):
                    const_ids[t.name] = symbols.lookup(t.name)
    top = c_max or 0
    for p in facts.predicates():
        for j in facts.counter_cols(p):
            rows = facts.relation(p)
            if rows.shape[0]:
                if rows[:, j].min() < 0:
                    raise EvaluationError(f"negative counter value in {p}")
                top = max(top, int(rows[:, j].max()))
    for r in program.rules:
        for a in (r.head, *r.atoms()):
            for t in a.args:
                if isinstance(t, Int):
                    if t.value < 0:
                        raise EvaluationError("negative counter literal")
                    top = max(top, t.value)
        for item in r.body:
            if isinstance(item, Leq) and isinstance(item.bound, Int):
                top = max(top, item.bound.value)
    nconst = max(len(symbols), 1)
    radices: dict[str, tuple[int, ...]] = {}
    counter_cols: dict[str, frozenset[int]] = {}
    for pred, k in arity.items():
        cc = frozenset(j for j in range(k) if sorts.get((pred, j)) == COUNTER)
        counter_cols[pred] = cc
        exact = tuple(top + 2 if j in cc else nconst for j in range(k))
        rounded = tuple(1 << (r - 1).bit_length() for r in exact)
        width = 1
        for rad in rounded:
            width *= rad
        radices[pred] = rounded if width < _MAX_KEY else exact
        width = 1
        for rad in radices[pred]:
            width *= rad
        if width >= _MAX_KEY:
            raise EvaluationError(
                f"{pred}: {k} columns over {nconst} constants exceed the 62-bit tuple encoding"
            )
    if strat is None:
        order = evaluation_order(program)
    else:
        check_stratification(program, strat)
        order = [lvl for lvl in strat.levels() if set(lvl) & idb]
        order = [[p for p in lvl if p in idb] for lvl in order]
    ctx = _Context(radices, const_ids, c_max, counter_cols)
    return ctx, order, symbols


def run(program: Program, facts, c_max: int | None = None, stratification: Stratification | None = None):
    """Evaluate and return ``(relations, context, symbols)`` without decoding."""
    facts = _facts_of(facts)
    ctx, order, symbols = _prepare(program, facts, c_max, stratification)
    rels: dict[str, Relation] = {}
    for pred in program.edb():
        rels[pred] = _edb_relation(facts, pred, ctx.radices[pred])
    views = _ViewCache.of(facts) if stratification is None and not ctx.const_ids else None
    sigs: dict[str, int] = {}
    for group in order:
        key = views.signature(program, group, sigs, ctx) if views is not None else None
        hit = views.get(key) if key is not None else None
        if hit is not None:
            for p, rel in zip(group, hit):
                rels[p] = rel
        else:
            _evaluate_group(program, group, rels, ctx)
            if key is not None:
                views.put(key, [rels[p] for p in group])
        if key is not None:
            for i, p in enumerate(group):
                sigs[p] = views.intern((key, i))
    return rels, ctx, symbols


def _to_store(program: Program, rels, ctx, symbols) -> FactStore:
    out = FactStore(symbols)
    for pred in sorted(program.idb()):
        out._rel[pred] = rels[pred].rows()
        out._counters[pred] = ctx.counter_cols.get(pred, frozenset())
    return out


def evaluate(
    program: Program,
    database: Union[FactStore, object],
    stratification: Stratification | None = None,
) -> FactStore:
    """Stratified bottom-up evaluation; returns every IDB relation.

    ``database`` is a FactStore or anything with a ``facts`` FactStore.  When
    a stratification is supplied, each of its strata is evaluated as one
    fixpoint in order; otherwise mutually recursive groups are evaluated in
    dependency order.
    """
    if uses_counters(program):
        raise ProgramError("program uses counter terms; evaluate it with evaluate_succ")
    rels, ctx, symbols = run(program, database, None, stratification)
    return _to_store(program, rels, ctx, symbols)


def evaluate_succ(
    program: Program,
    database: Union[FactStore, object],
    c_max: int,
    stratification: Stratification | None = None,
) -> FactStore:
    """Evaluation with counters ranging over ``1..c_max``.

    Rule instances that would derive a counter value outside the range do
    not fire.
    """
    if not isinstance(c_max, (int, np.integer)) or c_max < 1:
        raise ProgramError("c_max must be a positive integer")
    rels, ctx, symbols = run(program, database, int(c_max), stratification)
    return _to_store(program, rels, ctx, symbols)


def goal_ids(program: Program, database, c_max: int | None = None) -> np.ndarray:
    """Constant ids in the (unary) goal relation; skips decoding the rest."""
    if c_max is None and uses_counters(program):
        raise ProgramError("program uses counter terms; give c_max")
    rels, ctx, _ = run(program, database, c_max)
    goal = rels[program.goal]
    if goal.arity != 1:
        raise ProgramError("goal predicate is not unary")
    return goal.keys
