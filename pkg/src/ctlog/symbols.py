"""Interned constant names."""

from __future__ import annotations

import re
from typing import Iterable


class SymbolTable:
    """Bidirectional map between constant names and dense integer ids.

    A table built with :meth:`generated` names its ids ``<prefix><id>`` on
    demand instead of storing a list, which keeps multi-million-element
    domains cheap.
    """

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] | None = []
        self._ids: dict[str, int] = {}
        self._count = 0
        self._prefix = ""
        for n in names:
            self.intern(n)

    @classmethod
    def generated(cls, count: int, prefix: str = "s") -> "SymbolTable":
        table = cls()
        table._names = None
        table._count = count
        table._prefix = prefix
        return table

    def __len__(self) -> int:
        return self._count

    def intern(self, name: str) -> int:
        if self._names is None:
            i = self._parse_generated(name)
            if i is None:
                raise KeyError(f"{name!r} is not a generated symbol")
            return i
        i = self._ids.get(name)
        if i is None:
            i = self._ids[name] = self._count
            self._names.append(name)
            self._count += 1
        return i

    def lookup(self, name: str) -> int | None:
        if self._names is None:
            return self._parse_generated(name)
        return self._ids.get(name)

    def name(self, i: int) -> str:
        if self._names is None:
            if not 0 <= i < self._count:
                raise IndexError(i)
            return f"{self._prefix}{i}"
        return self._names[i]

    def names(self) -> list[str]:
        if self._names is None:
            return [f"{self._prefix}{i}" for i in range(self._count)]
        return list(self._names)

    def _parse_generated(self, name: str) -> int | None:
        m = re.fullmatch(re.escape(self._prefix) + r"(0|[1-9][0-9]*)", name)
        if m is None:
            return None
        i = int(m.group(1))
        return i if i < self._count else None

    def copy(self) -> "SymbolTable":
        if self._names is None:
            return SymbolTable.generated(self._count, self._prefix)
        return SymbolTable(self._names)
