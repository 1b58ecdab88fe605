"""Ground fact storage shared by the Kripke and Datalog layers.

A relation is an ``(m, arity)`` int64 array of distinct rows in lexicographic
order.  Columns hold interned constant ids, except counter columns which hold
plain integers.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator

import numpy as np

from .symbols import SymbolTable

Value = str | int


class FactSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def unique_rows(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] <= 1:
        return rows.copy()
    if rows.shape[1] == 0:
        return rows[:1].copy()
    return np.unique(rows, axis=0)


class FactStore:
    """Finite set of ground facts, grouped by predicate."""

    def __init__(self, symbols: SymbolTable | None = None):
        self.symbols = symbols if symbols is not None else SymbolTable()
        self._rel: dict[str, np.ndarray] = {}
        self._counters: dict[str, frozenset[int]] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def from_facts(
        cls, facts: Iterable[tuple[str, tuple]], symbols: SymbolTable | None = None
    ) -> "FactStore":
        store = cls(symbols)
        grouped: dict[str, list[tuple]] = {}
        for pred, args in facts:
            grouped.setdefault(pred, []).append(tuple(args))
        for pred, rows in grouped.items():
            store.add_facts(pred, rows)
        return store

    def add_facts(self, pred: str, rows: Iterable[tuple]) -> None:
        rows = list(rows)
        arity = len(rows[0]) if rows else self.arity(pred)
        if arity is None:
            raise ValueError(f"cannot infer arity of {pred}")
        counters = set()
        encoded = np.empty((len(rows), arity), dtype=np.int64)
        for r, row in enumerate(rows):
            if len(row) != arity:
                raise ValueError(f"arity mismatch for {pred}: {row!r}")
            for c, v in enumerate(row):
                if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                    counters.add(c)
                    encoded[r, c] = int(v)
                else:
                    encoded[r, c] = self.symbols.intern(str(v))
        old = self._counters.get(pred)
        if old is not None and rows and old != counters:
            raise ValueError(f"mixed constant/counter columns in {pred}")
        self.set_relation(pred, encoded, counters if rows else (old or ()))

    def set_relation(
        self, pred: str, rows: np.ndarray, counter_cols: Iterable[int] = ()
    ) -> None:
        self.clear_cache()
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError("relation must be two-dimensional")
        existing = self._rel.get(pred)
        if existing is not None:
            if existing.shape[1] != rows.shape[1]:
                raise ValueError(f"arity mismatch for {pred}")
            rows = np.concatenate([existing, rows])
        self._rel[pred] = unique_rows(rows)
        self._counters[pred] = frozenset(counter_cols) | self._counters.get(
            pred, frozenset()
        )

    def declare(self, pred: str, arity: int, counter_cols: Iterable[int] = ()) -> None:
        if pred not in self._rel:
            self.clear_cache()
            self._rel[pred] = np.empty((0, arity), dtype=np.int64)
            self._counters[pred] = frozenset(counter_cols)

    def clear_cache(self) -> None:
        # the evaluator caches encoded relations on the store
        self.__dict__.pop("_engine_cache", None)

    # -- access -------------------------------------------------------------

    def predicates(self) -> list[str]:
        return sorted(self._rel)

    def __contains__(self, pred: str) -> bool:
        return pred in self._rel

    def relation(self, pred: str) -> np.ndarray:
        rel = self._rel.get(pred)
        if rel is None:
            return np.empty((0, 0), dtype=np.int64)
        return rel

    def arity(self, pred: str) -> int | None:
        rel = self._rel.get(pred)
        return None if rel is None else rel.shape[1]

    def counter_cols(self, pred: str) -> frozenset[int]:
        return self._counters.get(pred, frozenset())

    def size(self) -> int:
        """Number of ground facts."""
        return sum(r.shape[0] for r in self._rel.values())

    def decode(self, pred: str, row) -> tuple:
        cc = self.counter_cols(pred)
        return tuple(
            int(v) if c in cc else self.symbols.name(int(v)) for c, v in enumerate(row)
        )

    def facts(self, pred: str) -> set[tuple]:
        return {self.decode(pred, row) for row in self.relation(pred)}

    def unary(self, pred: str) -> frozenset:
        """Members of a unary relation, decoded."""
        return frozenset(t[0] for t in self.facts(pred))

    def iter_facts(self) -> Iterator[tuple[str, tuple]]:
        for pred in self.predicates():
            for row in self.relation(pred):
                yield pred, self.decode(pred, row)

    def restrict(self, preds: Iterable[str]) -> "FactStore":
        out = FactStore(self.symbols)
        for p in preds:
            if p in self._rel:
                out._rel[p] = self._rel[p]
                out._counters[p] = self._counters[p]
        return out

    def constants(self) -> np.ndarray:
        """Sorted ids of every constant occurring in a non-counter column."""
        parts = []
        for pred, rel in self._rel.items():
            cc = self._counters[pred]
            for c in range(rel.shape[1]):
                if c not in cc:
                    parts.append(rel[:, c])
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(parts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactStore):
            return NotImplemented
        mine = {p for p in self._rel if self._rel[p].shape[0]}
        theirs = {p for p in other._rel if other._rel[p].shape[0]}
        return mine == theirs and all(self.facts(p) == other.facts(p) for p in mine)

    def __repr__(self) -> str:
        return f"FactStore({self.size()} facts over {len(self._rel)} predicates)"

    # -- text ---------------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for pred in self.predicates():
            for args in sorted(self.facts(pred), key=_sort_key):
                inner = f"({','.join(str(a) for a in args)})" if args else ""
                lines.append(f"{pred}{inner}.")
        return "\n".join(lines) + ("\n" if lines else "")


def _sort_key(args: tuple):
    return tuple((0, a, "") if isinstance(a, int) else (1, 0, a) for a in args)


_FACT = re.compile(r"\s*([A-Za-z0-9_]+)\s*(?:\(([^()]*)\))?\s*\.")
_CONST = re.compile(r"[a-z0-9_][A-Za-z0-9_]*")


def parse_facts(text: str, symbols: SymbolTable | None = None) -> FactStore:
    """Read ground facts such as ``R(a,b).``, ``C(a,3).`` or ``D.``."""
    facts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"[%#]", raw, maxsplit=1)[0]
        pos = 0
        while line[pos:].strip():
            m = _FACT.match(line, pos)
            if m is None:
                raise FactSyntaxError(f"malformed fact {line[pos:].strip()!r}", lineno)
            pos = m.end()
            args = []
            body = (m.group(2) or "").strip()
            for a in (body.split(",") if body else []):
                a = a.strip()
                if re.fullmatch(r"[0-9]+", a):
                    args.append(int(a))
                elif _CONST.fullmatch(a):
                    args.append(a)
                else:
                    raise FactSyntaxError(f"bad constant {a!r}", lineno)
            facts.append((m.group(1), tuple(args)))
    try:
        return FactStore.from_facts(facts, symbols)
    except ValueError as e:
        raise FactSyntaxError(str(e), 0) from e
