"""Line-based text format for Kripke structures.

::

    atoms p q          # optional: fixes the atom list and its order
    state a p          # state a, where p holds
    state b
    edge a b
    edge b b
"""

from __future__ import annotations

import re

from .structure import KripkeStructure, StructureError

_NAME = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.-]*")
_ATOM = re.compile(r"[a-z][a-z0-9_]*")


class KripkeSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_kripke(text: str) -> KripkeStructure:
    states: list[str] = []
    seen: set[str] = set()
    valuation: dict[str, set[str]] = {}
    edges: list[tuple[str, str, int]] = []
    ap: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        kw, args = words[0], words[1:]
        if kw == "atoms":
            if ap is not None:
                raise KripkeSyntaxError("atoms declared twice", lineno)
            for a in args:
                if not _ATOM.fullmatch(a):
                    raise KripkeSyntaxError(f"bad atom name {a!r}", lineno)
            if len(set(args)) != len(args):
                raise KripkeSyntaxError("duplicate atom", lineno)
            ap = list(args)
        elif kw == "state":
            if not args or not _NAME.fullmatch(args[0]):
                raise KripkeSyntaxError("expected a state name", lineno)
            name = args[0]
            if name in seen:
                raise KripkeSyntaxError(f"state {name!r} declared twice", lineno)
            for a in args[1:]:
                if not _ATOM.fullmatch(a):
                    raise KripkeSyntaxError(f"bad atom name {a!r}", lineno)
                if ap is not None and a not in ap:
                    raise KripkeSyntaxError(f"atom {a!r} not in the atoms line", lineno)
            seen.add(name)
            states.append(name)
            valuation[name] = set(args[1:])
        elif kw == "edge":
            if len(args) != 2:
                raise KripkeSyntaxError("edge takes two states", lineno)
            edges.append((args[0], args[1], lineno))
        else:
            raise KripkeSyntaxError(f"unknown directive {kw!r}", lineno)
    for a, b, lineno in edges:
        for s in (a, b):
            if s not in seen:
                raise KripkeSyntaxError(f"edge mentions undeclared state {s!r}", lineno)
    if ap is None:
        found: dict[str, None] = {}
        for s in states:
            for a in sorted(valuation[s]):
                found.setdefault(a, None)
        ap = sorted(found)
    try:
        return KripkeStructure.build(states, [(a, b) for a, b, _ in edges], valuation, ap)
    except StructureError as e:
        raise KripkeSyntaxError(str(e), 0) from e


def render_kripke(k: KripkeStructure) -> str:
    lines = []
    if k.ap:
        lines.append("atoms " + " ".join(k.ap))
    names = k.names.names()
    for s in range(k.n):
        props = [a for i, a in enumerate(k.ap) if k.labels[s, i]]
        lines.append(" ".join(["state", names[s], *props]))
    for a, b in zip(k.src.tolist(), k.dst.tolist()):
        lines.append(f"edge {names[a]} {names[b]}")
    return "\n".join(lines) + "\n"
