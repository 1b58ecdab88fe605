"""Finite Kripke structures, stored as integer arrays."""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from ..symbols import SymbolTable


class StructureError(ValueError):
    pass


def _sorted_edges(src: np.ndarray, dst: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    keys = np.unique(src.astype(np.int64) * max(n, 1) + dst.astype(np.int64))
    return keys // max(n, 1), keys % max(n, 1)


class KripkeStructure:
    """States ``0..n-1`` with names, a transition relation and a labelling.

    ``src``/``dst`` hold the transitions sorted by (source, target) without
    duplicates; ``labels[s, i]`` tells whether atom ``ap[i]`` holds at ``s``.
    The set-valued views ``states``, ``trans`` and ``valuation`` are built on
    first access.
    """

    def __init__(
        self,
        names: SymbolTable,
        src: np.ndarray,
        dst: np.ndarray,
        labels: np.ndarray,
        ap: Iterable[str],
    ):
        self.names = names
        self.n = len(names)
        self.ap = tuple(ap)
        labels = np.asarray(labels, dtype=bool)
        if labels.shape != (self.n, len(self.ap)):
            raise StructureError(
                f"labelling has shape {labels.shape}, expected {(self.n, len(self.ap))}"
            )
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise StructureError("source and target arrays differ in length")
        if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n):
            raise StructureError("transition endpoint outside the state set")
        self.src, self.dst = _sorted_edges(src, dst, self.n)
        self.labels = labels
        for a in self.ap:
            if not a or not (a[0].islower() and a.replace("_", "").isalnum()):
                raise StructureError(f"bad atom name {a!r}")
        if len(set(self.ap)) != len(self.ap):
            raise StructureError("duplicate atom names")

    # -- constructors -------------------------------------------------------

    @classmethod
    def build(
        cls,
        states: Iterable[str],
        trans: Iterable[tuple[str, str]],
        valuation: Mapping[str, Iterable[str]] | None = None,
        ap: Iterable[str] | None = None,
    ) -> "KripkeStructure":
        """Construct from names.  States keep the order given (sets are sorted)."""
        if isinstance(states, (set, frozenset)):
            states = sorted(states)
        names = SymbolTable(states)
        valuation = dict(valuation or {})
        if ap is None:
            seen: dict[str, None] = {}
            for s in names.names():
                for a in sorted(valuation.get(s, ())):
                    seen.setdefault(a, None)
            ap = tuple(seen)
        ap = tuple(ap)
        index = {a: i for i, a in enumerate(ap)}
        labels = np.zeros((len(names), len(ap)), dtype=bool)
        for s, props in valuation.items():
            sid = names.lookup(s)
            if sid is None:
                raise StructureError(f"valuation names unknown state {s!r}")
            for a in props:
                if a not in index:
                    raise StructureError(f"atom {a!r} not declared")
                labels[sid, index[a]] = True
        pairs = list(trans)
        src = np.empty(len(pairs), dtype=np.int64)
        dst = np.empty(len(pairs), dtype=np.int64)
        for i, (a, b) in enumerate(pairs):
            ia, ib = names.lookup(a), names.lookup(b)
            if ia is None or ib is None:
                raise StructureError(f"transition ({a}, {b}) uses an unknown state")
            src[i], dst[i] = ia, ib
        return cls(names, src, dst, labels, ap)

    # -- graph helpers --------------------------------------------------------

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    @property
    def total(self) -> bool:
        """Whether every state has a successor."""
        return bool(self.n == 0 or self.out_degree.min() > 0)

    @cached_property
    def forward(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR successor lists: ``(indptr, targets)``."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.out_degree, out=indptr[1:])
        return indptr, self.dst

    @cached_property
    def backward(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR predecessor lists: ``(indptr, sources)``."""
        order = np.argsort(self.dst, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.dst, minlength=self.n), out=indptr[1:])
        return indptr, self.src[order]

    def atom_index(self, name: str) -> int:
        try:
            return self.ap.index(name)
        except ValueError:
            raise StructureError(f"atom {name!r} is not declared by the structure") from None

    def state_id(self, name: str) -> int:
        i = self.names.lookup(name)
        if i is None:
            raise StructureError(f"unknown state {name!r}")
        return i

    def state_names(self, ids: Iterable[int]) -> frozenset[str]:
        return frozenset(self.names.name(int(i)) for i in ids)

    # -- set views ------------------------------------------------------------

    @cached_property
    def states(self) -> frozenset[str]:
        return frozenset(self.names.names())

    @cached_property
    def trans(self) -> frozenset[tuple[str, str]]:
        name = self.names.name
        return frozenset((name(int(a)), name(int(b))) for a, b in zip(self.src, self.dst))

    @cached_property
    def valuation(self) -> dict[str, frozenset[str]]:
        return {
            self.names.name(s): frozenset(a for i, a in enumerate(self.ap) if self.labels[s, i])
            for s in range(self.n)
        }

    def successors(self, state: str) -> list[str]:
        indptr, targets = self.forward
        s = self.state_id(state)
        return [self.names.name(int(t)) for t in targets[indptr[s] : indptr[s + 1]]]

    def with_ap(self, ap: Iterable[str]) -> "KripkeStructure":
        """Same structure over a (super)set of atoms; new atoms are false everywhere."""
        ap = tuple(ap)
        missing = [a for a in self.ap if a not in ap and self.labels[:, self.ap.index(a)].any()]
        if missing:
            raise StructureError(f"atoms {missing} hold somewhere but are dropped")
        labels = np.zeros((self.n, len(ap)), dtype=bool)
        for i, a in enumerate(ap):
            if a in self.ap:
                labels[:, i] = self.labels[:, self.ap.index(a)]
        return KripkeStructure(self.names, self.src, self.dst, labels, ap)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        if self.states != other.states or self.trans != other.trans:
            return False
        return self.valuation == other.valuation

    def __hash__(self):
        return hash((self.states, self.trans))

    def __repr__(self) -> str:
        return f"KripkeStructure({self.n} states, {self.src.size} transitions, ap={list(self.ap)})"


def disjoint_union(parts: list[KripkeStructure]) -> tuple[KripkeStructure, np.ndarray]:
    """Place structures side by side.  Returns the union and each part's offset.

    All parts must share the same atom list.  State names are generated
    (``s0``, ``s1``, ...), so this is meant for batch evaluation.
    """
    if not parts:
        raise StructureError("empty union")
    ap = parts[0].ap
    if any(p.ap != ap for p in parts):
        raise StructureError("parts disagree on atoms")
    sizes = np.array([p.n for p in parts], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    src = np.concatenate([p.src + o for p, o in zip(parts, offsets)])
    dst = np.concatenate([p.dst + o for p, o in zip(parts, offsets)])
    labels = np.concatenate([p.labels for p in parts])
    names = SymbolTable.generated(int(sizes.sum()))
    return KripkeStructure(names, src, dst, labels, ap), offsets
