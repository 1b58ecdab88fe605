"""Relational databases over a Kripke schema and the maps to and from structures.

A database holds either one binary relation ``R`` or the pair ``S0``/``S1``
(optionally ``Next`` for the first-child/next-sibling encoding), plus unary
relations ``P0 .. P{n-1}``.  Atom ``ap[i]`` corresponds to ``P{i}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ..facts import FactStore, FactSyntaxError, parse_facts
from ..symbols import SymbolTable
from .structure import KripkeStructure, StructureError

BINARY_NAMES = ("R", "S0", "S1", "Next")
_UNARY = re.compile(r"P(0|[1-9][0-9]*)")


class SchemaError(ValueError):
    pass


def unary_name(i: int) -> str:
    return f"P{i}"


@dataclass
class RelationalDatabase:
    facts: FactStore
    ap: tuple[str, ...]
    universe: frozenset[str] | None = None

    def __post_init__(self):
        self.ap = tuple(self.ap)
        for pred in self.facts.predicates():
            arity = self.facts.arity(pred)
            if pred in BINARY_NAMES:
                if arity != 2:
                    raise SchemaError(f"{pred} must be binary")
            elif _UNARY.fullmatch(pred):
                if arity != 1:
                    raise SchemaError(f"{pred} must be unary")
                if int(pred[1:]) >= len(self.ap):
                    raise SchemaError(f"{pred} has no matching atom name")
            else:
                raise SchemaError(f"predicate {pred} is not part of a Kripke schema")
            if self.facts.counter_cols(pred):
                raise SchemaError(f"{pred} holds integers; states must be names")
        if "R" in self.facts and any(p in self.facts for p in ("S0", "S1")):
            raise SchemaError("database mixes R with S0/S1")

    # -- construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        binary: dict[str, Iterable[tuple[str, str]]],
        unary: Iterable[Iterable[str]] = (),
        ap: Iterable[str] | None = None,
        universe: Iterable[str] | None = None,
        symbols: SymbolTable | None = None,
    ) -> "RelationalDatabase":
        """``binary`` maps relation names (R, or S0/S1/Next) to pairs; ``unary[i]`` is P_i."""
        unary = [list(u) for u in unary]
        store = FactStore(symbols)
        for name, pairs in binary.items():
            store.add_facts(name, [tuple(p) for p in pairs]) if pairs else store.declare(name, 2)
        for i, members in enumerate(unary):
            if members:
                store.add_facts(unary_name(i), [(m,) for m in members])
            else:
                store.declare(unary_name(i), 1)
        ap = tuple(ap) if ap is not None else tuple(f"p{i}" for i in range(len(unary)))
        if len(ap) < len(unary):
            raise SchemaError("fewer atom names than unary relations")
        if universe is not None:
            universe = frozenset(universe)
            for u in sorted(universe):
                store.symbols.intern(u)
        return cls(store, ap, universe)

    # -- access ---------------------------------------------------------------

    @property
    def schema(self) -> str:
        """``"R"`` for single-relation form, ``"S"`` for the S0/S1 form."""
        return "S" if any(p in self.facts for p in ("S0", "S1", "Next")) else "R"

    @property
    def n(self) -> int:
        return len(self.ap)

    @property
    def symbols(self) -> SymbolTable:
        return self.facts.symbols

    def binary(self, name: str) -> frozenset[tuple[str, str]]:
        return frozenset(self.facts.facts(name))

    def unary(self, i: int) -> frozenset[str]:
        return self.facts.unary(unary_name(i))

    def pairs(self, name: str) -> np.ndarray:
        rel = self.facts.relation(name)
        return rel if rel.size else np.empty((0, 2), dtype=np.int64)

    def members(self, i: int) -> np.ndarray:
        rel = self.facts.relation(unary_name(i))
        return rel[:, 0] if rel.size else np.empty(0, dtype=np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelationalDatabase):
            return NotImplemented
        return self.ap == other.ap and self.facts == other.facts

    # -- text -------------------------------------------------------------------

    def to_text(self) -> str:
        header = f"% atoms: {' '.join(self.ap)}\n" if self.ap else ""
        return header + self.facts.to_text()


def parse_database(text: str, ap: Iterable[str] | None = None) -> RelationalDatabase:
    """Read the fact format.  A ``% atoms: p q`` line names the atoms of P0, P1, ..."""
    declared = None
    for line in text.splitlines():
        m = re.match(r"\s*%\s*atoms\s*:(.*)$", line)
        if m:
            declared = tuple(m.group(1).split())
    facts = parse_facts(text)
    if ap is None:
        ap = declared
    if ap is None:
        top = -1
        for pred in facts.predicates():
            if _UNARY.fullmatch(pred):
                top = max(top, int(pred[1:]))
        ap = tuple(f"p{i}" for i in range(top + 1))
    try:
        return RelationalDatabase(facts, tuple(ap))
    except SchemaError as e:
        raise FactSyntaxError(str(e), 0) from e


# -- the mappings -------------------------------------------------------------


def kripke_to_db(k: KripkeStructure) -> RelationalDatabase:
    """P_i collects the states where atom i holds; R is copied."""
    store = FactStore(k.names)
    store.set_relation("R", np.stack([k.src, k.dst], axis=1))
    for i in range(len(k.ap)):
        store.set_relation(unary_name(i), np.flatnonzero(k.labels[:, i])[:, None])
    return RelationalDatabase(store, k.ap)


def domain_ids(d: RelationalDatabase) -> np.ndarray:
    """Sorted symbol ids of the constants mentioned by the schema relations."""
    return d.facts.constants()


def domain_of(d: RelationalDatabase) -> frozenset[str]:
    """Every constant appearing in the binary relations or some P_i."""
    return frozenset(d.symbols.name(int(i)) for i in domain_ids(d))


def _closed_pairs(d: RelationalDatabase) -> np.ndarray:
    if d.schema != "R":
        raise SchemaError("total closure needs the single-relation (R) form")
    r = d.pairs("R")
    dom = domain_ids(d)
    has_succ = np.isin(dom, r[:, 0])
    loops = dom[~has_succ]
    if loops.size == 0:
        return r
    return np.concatenate([r, np.stack([loops, loops], axis=1)])


def total_closure(d: RelationalDatabase) -> RelationalDatabase:
    """Add a self-loop at every domain element without an R-successor."""
    store = FactStore(d.symbols)
    for pred in d.facts.predicates():
        if pred != "R":
            store.set_relation(pred, d.facts.relation(pred))
    store.set_relation("R", _closed_pairs(d))
    return RelationalDatabase(store, d.ap, d.universe)


def db_to_kripke(d: RelationalDatabase, ap: Iterable[str] | None = None) -> KripkeStructure:
    """States are the domain, transitions the total closure of R."""
    dom = domain_ids(d)
    if dom.size == 0:
        raise StructureError("empty structure")
    ap = tuple(ap) if ap is not None else d.ap
    if len(ap) < d.n:
        raise SchemaError("fewer atom names than unary relations")
    r = _closed_pairs(d)
    # dense renumbering of the domain, in symbol-id order
    remap = np.full(len(d.symbols), -1, dtype=np.int64)
    remap[dom] = np.arange(dom.size)
    if dom.size == len(d.symbols):
        names = d.symbols.copy()
    else:
        names = SymbolTable(d.symbols.name(int(i)) for i in dom)
    labels = np.zeros((dom.size, len(ap)), dtype=bool)
    for i in range(d.n):
        labels[remap[d.members(i)], i] = True
    return KripkeStructure(names, remap[r[:, 0]], remap[r[:, 1]], labels, ap)


def lexicographic(k: KripkeStructure) -> np.ndarray:
    """Rank of each state under name order."""
    names = k.names.names()
    order = sorted(range(k.n), key=lambda s: names[s])
    rank = np.empty(k.n, dtype=np.int64)
    rank[order] = np.arange(k.n)
    return rank


def split_outdegree2(
    k: KripkeStructure,
    child_order: Callable[[KripkeStructure], np.ndarray] | np.ndarray | None = None,
) -> RelationalDatabase:
    """Encode a structure of outdegree 1 or 2 with S0 (first child) and S1 (second).

    ``child_order`` is a rank per state (or a function computing it from the
    structure); children are sorted by rank.  The default ranks by name.
    """
    if child_order is None:
        rank = lexicographic(k)
    elif callable(child_order):
        rank = np.asarray(child_order(k), dtype=np.int64)
    else:
        rank = np.asarray(child_order, dtype=np.int64)
    if rank.shape != (k.n,) or np.unique(rank).size != k.n:
        raise StructureError("child order must rank every state distinctly")
    deg = k.out_degree
    bad = np.flatnonzero((deg == 0) | (deg > 2))
    if bad.size:
        s = int(bad[0])
        raise StructureError(
            f"state {k.names.name(s)!r} has outdegree {int(deg[s])}; expected 1 or 2"
        )
    src, dst = k.src, k.dst
    order = np.lexsort((rank[dst], src))
    src, dst = src[order], dst[order]
    first = np.ones(src.size, dtype=bool)
    first[1:] = src[1:] != src[:-1]
    store = FactStore(k.names)
    store.set_relation("S0", np.stack([src[first], dst[first]], axis=1))
    store.set_relation("S1", np.stack([src[~first], dst[~first]], axis=1))
    for i in range(len(k.ap)):
        store.set_relation(unary_name(i), np.flatnonzero(k.labels[:, i])[:, None])
    return RelationalDatabase(store, k.ap)


def sibling_encoding(
    k: KripkeStructure,
    child_order: Callable[[KripkeStructure], np.ndarray] | np.ndarray | None = None,
) -> RelationalDatabase:
    """First-child / next-sibling encoding (S0 and Next) of arbitrary branching.

    Raises when a state would need two different next siblings, which happens
    when it is a child of two parents with different sibling lists.
    """
    rank = lexicographic(k) if child_order is None else (
        np.asarray(child_order(k) if callable(child_order) else child_order, dtype=np.int64)
    )
    if k.n and k.out_degree.min() == 0:
        s = int(np.flatnonzero(k.out_degree == 0)[0])
        raise StructureError(f"state {k.names.name(s)!r} has no successor")
    src, dst = k.src, k.dst
    order = np.lexsort((rank[dst], src))
    src, dst = src[order], dst[order]
    first = np.ones(src.size, dtype=bool)
    first[1:] = src[1:] != src[:-1]
    chained = ~first[1:]
    nxt: dict[int, int] = {}
    last_child: set[int] = set()
    for a, b, same in zip(dst[:-1].tolist(), dst[1:].tolist(), chained.tolist()):
        if same:
            if nxt.get(a, b) != b or a in last_child:
                raise StructureError(
                    f"state {k.names.name(a)!r} has inconsistent next siblings"
                )
            nxt[a] = b
        elif a in nxt:
            raise StructureError(f"state {k.names.name(a)!r} has inconsistent next siblings")
        else:
            last_child.add(a)
    if dst.size:
        tail = int(dst[-1])
        if tail in nxt:
            raise StructureError(f"state {k.names.name(tail)!r} has inconsistent next siblings")
    store = FactStore(k.names)
    store.set_relation("S0", np.stack([src[first], dst[first]], axis=1))
    pairs = np.array(sorted(nxt.items()), dtype=np.int64).reshape(-1, 2)
    store.set_relation("Next", pairs)
    for i in range(len(k.ap)):
        store.set_relation(unary_name(i), np.flatnonzero(k.labels[:, i])[:, None])
    return RelationalDatabase(store, k.ap)
