"""Operator trees for the two Datalog fragments, and their flattening.

A tree is built from leaves (``AtomLeaf``, ``NegAtomLeaf``, ``TopLeaf``) and
operator nodes.  Flattening gives every node a goal predicate: the root is
``G`` and the other nodes are ``G1, G2, ...`` in post-order; operators that
need a binary helper get ``B`` (root) or ``B1, B2, ...``, and likewise ``C``
for the counter helper.  ``A``, ``W`` and ``2S`` are shared by the whole
program and emitted once, after all node blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .datalog.syntax import CMAX, Atom, Int, Leq, Literal, Pred, Program, Rule, Var

X, Y, Z, U, N = Var("X"), Var("Y"), Var("Z"), Var("U"), Var("N")


@dataclass(frozen=True)
class AtomLeaf:
    index: int


@dataclass(frozen=True)
class NegAtomLeaf:
    index: int


@dataclass(frozen=True)
class TopLeaf:
    pass


@dataclass(frozen=True)
class NotOp:
    child: "Node"


@dataclass(frozen=True)
class AndOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class OrOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class NextOp:
    child: "Node"


@dataclass(frozen=True)
class UntilOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class UntilTildeOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class ExNextOp:
    child: "Node"


@dataclass(frozen=True)
class AllNextOp:
    child: "Node"


@dataclass(frozen=True)
class ExUntilOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class AllUntilOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class ExUntilTildeOp:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class AllUntilTildeOp:
    left: "Node"
    right: "Node"


Node = Union[
    AtomLeaf, NegAtomLeaf, TopLeaf, NotOp, AndOp, OrOp, NextOp, UntilOp, UntilTildeOp,
    ExNextOp, AllNextOp, ExUntilOp, AllUntilOp, ExUntilTildeOp, AllUntilTildeOp,
]

LEAVES = (AtomLeaf, NegAtomLeaf, TopLeaf)
UNARY_OPS = (NotOp, NextOp, ExNextOp, AllNextOp)
STD_KINDS = (AtomLeaf, TopLeaf, NotOp, AndOp, NextOp, UntilOp, UntilTildeOp)
TDS_KINDS = (
    AtomLeaf, NegAtomLeaf, TopLeaf, AndOp, OrOp, ExNextOp, AllNextOp,
    ExUntilOp, AllUntilOp, ExUntilTildeOp, AllUntilTildeOp,
)

# s-expression tags
TAGS = {
    AtomLeaf: "atom", NegAtomLeaf: "negatom", TopLeaf: "top", NotOp: "not", AndOp: "and",
    OrOp: "or", NextOp: "next", UntilOp: "until", UntilTildeOp: "until~",
    ExNextOp: "exnext", AllNextOp: "allnext", ExUntilOp: "exuntil", AllUntilOp: "alluntil",
    ExUntilTildeOp: "exuntil~", AllUntilTildeOp: "alluntil~",
}
KINDS = {tag: cls for cls, tag in TAGS.items()}


class TreeError(ValueError):
    pass


def node_children(node: Node) -> tuple:
    if isinstance(node, LEAVES):
        return ()
    if isinstance(node, UNARY_OPS):
        return (node.child,)
    return (node.left, node.right)


def nodes(node: Node) -> Iterator[Node]:
    """Post-order traversal."""
    for c in node_children(node):
        yield from nodes(c)
    yield node


def node_count(node: Node) -> int:
    return sum(1 for _ in nodes(node))


def tree_depth(node: Node) -> int:
    cs = node_children(node)
    return 0 if not cs else 1 + max(tree_depth(c) for c in cs)


def make_node(kind, children: list, index: int | None = None) -> Node:
    """Build one node from a class or an s-expression tag, checking arity."""
    cls = KINDS.get(kind, kind) if isinstance(kind, str) else kind
    if cls not in TAGS:
        raise TreeError(f"unknown operator kind {kind!r}")
    if cls in (AtomLeaf, NegAtomLeaf):
        if children or index is None or index < 0:
            raise TreeError(f"{TAGS[cls]} takes an atom index and no children")
        return cls(index)
    if cls is TopLeaf:
        if children:
            raise TreeError("top takes no children")
        return cls()
    want = 1 if cls in UNARY_OPS else 2
    if len(children) != want:
        raise TreeError(f"{TAGS[cls]} takes {want} operand(s), got {len(children)}")
    return cls(*children)


def to_sexpr(node: Node, names: tuple[str, ...] | None = None) -> str:
    tag = TAGS[type(node)]
    if isinstance(node, (AtomLeaf, NegAtomLeaf)):
        label = names[node.index] if names and node.index < len(names) else str(node.index)
        return f"({tag} {label})"
    if isinstance(node, TopLeaf):
        return "(top)"
    return "(" + " ".join([tag, *(to_sexpr(c, names) for c in node_children(node))]) + ")"


# -- flattening -------------------------------------------------------------------


def _a(pred: str, *args) -> Literal:
    return Literal(Atom(pred, tuple(args)))


def _na(pred: str, *args) -> Literal:
    return Literal(Atom(pred, tuple(args)), negated=True)


def _r(head: str, head_args, *body) -> Rule:
    return Rule(Atom(head, tuple(head_args)), tuple(body))


def pi_n(n: int, binary: tuple[str, ...]) -> list[Rule]:
    """Domain rules: W holds for every constant of the binary and unary EDBs."""
    rules = []
    for rel in binary:
        rules.append(_r("W", [X], _a(rel, X, Y)))
        rules.append(_r("W", [X], _a(rel, Y, X)))
    for i in range(n):
        rules.append(_r("W", [X], _a(f"P{i}", X)))
    return rules


@dataclass
class _Names:
    goal: dict[int, str]
    helper: dict[tuple[int, str], str]


def assign_names(root: Node, helpers: Callable[[Node], tuple[str, ...]]) -> _Names:
    """Goal names by post-order, helper names (B, C) by post-order per letter."""
    goal: dict[int, str] = {}
    helper: dict[tuple[int, str], str] = {}
    counts: dict[str, int] = {}
    g = 0
    for node in nodes(root):
        if node is root:
            goal[id(node)] = "G"
        else:
            g += 1
            goal[id(node)] = f"G{g}"
        for letter in helpers(node):
            if node is root:
                helper[(id(node), letter)] = letter
            else:
                counts[letter] = counts.get(letter, 0) + 1
                helper[(id(node), letter)] = f"{letter}{counts[letter]}"
    return _Names(goal, helper)


def _preorder(node: Node) -> Iterator[Node]:
    yield node
    for c in node_children(node):
        yield from _preorder(c)


def flatten_tree(
    root: Node,
    n: int,
    block: Callable[[Node, str, tuple[str, ...], Callable[[str], str]], tuple[list[Rule], set[str]]],
    shared: Callable[[str], list[Rule]],
    helpers: Callable[[Node], tuple[str, ...]],
    shared_order: tuple[str, ...],
) -> Program:
    """Emit each node's block (pre-order from the root), then shared rules once."""
    names = assign_names(root, helpers)
    rules: list[Rule] = []
    needed: set[str] = set()
    for node in _preorder(root):
        kids = tuple(names.goal[id(c)] for c in node_children(node))
        got, need = block(node, names.goal[id(node)], kids, lambda L, node=node: names.helper[(id(node), L)])
        rules.extend(got)
        needed |= need
    for name in shared_order:
        if name in needed:
            rules.extend(shared(name))
    return Program(tuple(rules), "G")


# -- STD ---------------------------------------------------------------------------


def std_block(node: Node, g: str, kids: tuple[str, ...], helper) -> tuple[list[Rule], set[str]]:
    if isinstance(node, AtomLeaf):
        return [_r(g, [X], _a(f"P{node.index}", X))], set()
    if isinstance(node, TopLeaf):
        return [_r(g, [X], _a("W", X))], {"W"}
    if isinstance(node, NotOp):
        return [_r(g, [X], _a("W", X), _na(kids[0], X))], {"W"}
    if isinstance(node, AndOp):
        return [_r(g, [X], _a(kids[0], X), _a(kids[1], X))], set()
    if isinstance(node, NextOp):
        g1 = kids[0]
        return [
            _r(g, [X], _a(g1, X), _na("A", X)),
            _r(g, [X], _a("R", X, Y), _a(g1, Y)),
        ], {"A"}
    if isinstance(node, UntilOp):
        g1, g2 = kids
        return [
            _r(g, [X], _a(g2, X)),
            _r(g, [X], _a(g1, X), _a("R", X, Y), _a(g, Y)),
        ], set()
    if isinstance(node, UntilTildeOp):
        g1, g2 = kids
        b = helper("B")
        return [
            _r(g, [X], _a(g1, X), _a(g2, X)),
            _r(g, [X], _a(g2, X), _na("A", X)),
            _r(g, [X], _a(b, X, X)),
            _r(g, [X], _a(g2, X), _a("R", X, Y), _a(g, Y)),
            _r(b, [X, Y], _a(g2, X), _a("R", X, Y), _a(g2, Y)),
            _r(b, [X, Y], _a(g2, X), _a("R", X, U), _a(b, U, Y)),
        ], {"A"}
    raise TreeError(f"{type(node).__name__} is not an STD operator")


def std_helpers(node: Node) -> tuple[str, ...]:
    return ("B",) if isinstance(node, UntilTildeOp) else ()


def std_shared(n: int) -> Callable[[str], list[Rule]]:
    def shared(name: str) -> list[Rule]:
        if name == "A":
            return [_r("A", [X], _a("R", X, Y))]
        return pi_n(n, ("R",))

    return shared


# -- TDS ---------------------------------------------------------------------------


def tds_block(c_max):
    bound = CMAX if c_max is None else Int(int(c_max))

    def block(node: Node, g: str, kids: tuple[str, ...], helper) -> tuple[list[Rule], set[str]]:
        if isinstance(node, AtomLeaf):
            return [_r(g, [X], _a(f"P{node.index}", X))], set()
        if isinstance(node, NegAtomLeaf):
            # W keeps the rule safe; it ranges over the same domain
            return [_r(g, [X], _a("W", X), _na(f"P{node.index}", X))], {"W"}
        if isinstance(node, TopLeaf):
            return [_r(g, [X], _a("W", X))], {"W"}
        if isinstance(node, AndOp):
            return [_r(g, [X], _a(kids[0], X), _a(kids[1], X))], set()
        if isinstance(node, OrOp):
            return [_r(g, [X], _a(kids[0], X)), _r(g, [X], _a(kids[1], X))], set()
        if isinstance(node, ExNextOp):
            g1 = kids[0]
            return [
                _r(g, [X], _a("S0", X, Y), _a(g1, Y)),
                _r(g, [X], _a("S1", X, Y), _a(g1, Y)),
            ], set()
        if isinstance(node, AllNextOp):
            g1 = kids[0]
            return [
                _r(g, [X], _a("S0", X, Y), _na("2S", X), _a(g1, Y)),
                _r(g, [X], _a("S0", X, Y), _a("S1", X, Z), _a(g1, Y), _a(g1, Z)),
            ], {"2S"}
        if isinstance(node, ExUntilOp):
            g1, g2 = kids
            return [
                _r(g, [X], _a(g2, X)),
                _r(g, [X], _a(g1, X), _a("S0", X, Y), _a(g, Y)),
                _r(g, [X], _a(g1, X), _a("S1", X, Y), _a(g, Y)),
            ], set()
        if isinstance(node, AllUntilOp):
            g1, g2 = kids
            return [
                _r(g, [X], _a(g2, X)),
                _r(g, [X], _a(g1, X), _a("S0", X, Y), _na("2S", X), _a(g, Y)),
                _r(g, [X], _a(g1, X), _a("S0", X, Y), _a("S1", X, Z), _a(g, Y), _a(g, Z)),
            ], {"2S"}
        if isinstance(node, ExUntilTildeOp):
            g1, g2 = kids
            b = helper("B")
            return [
                _r(g, [X], _a(g1, X), _a(g2, X)),
                _r(g, [X], _a(b, X, X)),
                _r(g, [X], _a(g2, X), _a("S0", X, Y), _a(g, Y)),
                _r(g, [X], _a(g2, X), _a("S1", X, Y), _a(g, Y)),
                _r(b, [X, Y], _a(g2, X), _a("S0", X, Y), _a(g2, Y)),
                _r(b, [X, Y], _a(g2, X), _a("S1", X, Y), _a(g2, Y)),
                _r(b, [X, Y], _a(g2, X), _a("S0", X, U), _a(b, U, Y)),
                _r(b, [X, Y], _a(g2, X), _a("S1", X, U), _a(b, U, Y)),
            ], set()
        if isinstance(node, AllUntilTildeOp):
            g1, g2 = kids
            c = helper("C")
            guard = Leq(N, bound)
            return [
                _r(g, [X], _a(g1, X), _a(g2, X)),
                _r(g, [X], _a(c, X, bound)),
                _r(g, [X], _a(g2, X), _a("S0", X, Y), _na("2S", X), _a(g, Y)),
                _r(g, [X], _a(g2, X), _a("S0", X, Y), _a("S1", X, Z), _a(g, Y), _a(g, Z)),
                _r(c, [X, N], _a(g2, X), _a("S0", X, Y), _na("2S", X), _a(c, Y, Pred(N)), guard),
                _r(c, [X, N], _a(g2, X), _a("S0", X, Y), _a("S1", X, Z),
                   _a(c, Y, Pred(N)), _a(c, Z, Pred(N)), guard),
                _r(c, [X, N], _a(g2, X), _a("S0", X, Y), _a("S1", X, Z),
                   _a(g, Y), _a(c, Z, Pred(N)), guard),
                _r(c, [X, N], _a(g2, X), _a("S0", X, Y), _a("S1", X, Z),
                   _a(c, Y, Pred(N)), _a(g, Z), guard),
                _r(c, [X, Int(1)], _a(g2, X), _a("S0", X, Y), _na("2S", X), _a(g2, Y)),
                _r(c, [X, Int(1)], _a(g2, X), _a("S0", X, Y), _a("S1", X, Z),
                   _a(g2, Y), _a(g2, Z)),
            ], {"2S"}
        raise TreeError(f"{type(node).__name__} is not a TDS operator")

    return block


def tds_helpers(node: Node) -> tuple[str, ...]:
    if isinstance(node, ExUntilTildeOp):
        return ("B",)
    if isinstance(node, AllUntilTildeOp):
        return ("C",)
    return ()


def tds_shared(n: int) -> Callable[[str], list[Rule]]:
    def shared(name: str) -> list[Rule]:
        if name == "2S":
            return [_r("2S", [X], _a("S0", X, Y), _a("S1", X, Z))]
        return pi_n(n, ("S0", "S1"))

    return shared
