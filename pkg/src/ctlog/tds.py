"""The successor fragment: positive-normal-form CTL over outdegree-2 encodings."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ctl.formula import AU, AUt, AX, EU, EUt, EX, And, Atom as CAtom, Formula, Not, Or, Top, atoms, is_pnf
from .ctl.normal import to_pnf
from .datalog.engine import evaluate_succ
from .datalog.syntax import Atom, Literal, Program, Rule
from .kripke.database import split_outdegree2
from .kripke.structure import KripkeStructure
from .operators import (
    TDS_KINDS,
    AllNextOp,
    AllUntilOp,
    AllUntilTildeOp,
    AndOp,
    AtomLeaf,
    ExNextOp,
    ExUntilOp,
    ExUntilTildeOp,
    NegAtomLeaf,
    Node,
    OrOp,
    TopLeaf,
    TreeError,
    X,
    Y,
    flatten_tree,
    make_node,
    node_count,
    nodes,
    pi_n,
    tds_block,
    tds_helpers,
    tds_shared,
    to_sexpr,
)
from .std import NotInFragmentError


@dataclass(frozen=True)
class TdsProgram:
    root: Node
    n: int
    ap: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for node in nodes(self.root):
            if not isinstance(node, TDS_KINDS):
                raise TreeError(f"{type(node).__name__} is not a TDS operator")
            if isinstance(node, (AtomLeaf, NegAtomLeaf)) and node.index >= self.n:
                raise TreeError(f"atom index {node.index} out of range for n={self.n}")

    def size(self) -> int:
        return node_count(self.root)

    def sexpr(self) -> str:
        return to_sexpr(self.root, self.ap or None)

    def uses_counters(self) -> bool:
        return any(isinstance(node, AllUntilTildeOp) for node in nodes(self.root))


def build_tds(kind, children: list = (), n: int = 0, index: int | None = None) -> TdsProgram:
    children = list(children)
    for c in children:
        if c.n != n:
            raise TreeError(f"sub-program has n={c.n}, expected {n}")
    ap = children[0].ap if children else ()
    return TdsProgram(make_node(kind, [c.root for c in children], index), n, ap)


_BINARY = {And: AndOp, Or: OrOp, EU: ExUntilOp, AU: AllUntilOp, EUt: ExUntilTildeOp, AUt: AllUntilTildeOp}


def ctl_to_tds(f: Formula, ap: tuple[str, ...] | None = None) -> TdsProgram:
    """Translate a positive-normal-form formula.

    ``false`` (written as the negation of ``true``) has no leaf of its own;
    it becomes the conjunction of ``P0`` and its negation, so at least one
    unary relation is always present.
    """
    if not is_pnf(f):
        raise NotInFragmentError("formula is not in positive normal form; apply to_pnf first")
    ap = tuple(ap) if ap is not None else atoms(f)
    index = {a: i for i, a in enumerate(ap)}
    needs_p0 = False

    def leaf(name: str, cls):
        if name not in index:
            raise NotInFragmentError(f"atom {name!r} missing from the atom list")
        return cls(index[name])

    def tr(g: Formula) -> Node:
        nonlocal needs_p0
        if isinstance(g, CAtom):
            return leaf(g.name, AtomLeaf)
        if isinstance(g, Top):
            return TopLeaf()
        if isinstance(g, Not):
            if isinstance(g.arg, CAtom):
                return leaf(g.arg.name, NegAtomLeaf)
            needs_p0 = True
            return AndOp(AtomLeaf(0), NegAtomLeaf(0))
        if isinstance(g, EX):
            return ExNextOp(tr(g.arg))
        if isinstance(g, AX):
            return AllNextOp(tr(g.arg))
        return _BINARY[type(g)](tr(g.left), tr(g.right))

    root = tr(f)
    if needs_p0 and not ap:
        # any unary relation will do; this one is simply left empty
        ap = ("p0",)
    return TdsProgram(root, len(ap), ap)


def flatten_tds(p: TdsProgram, c_max: int | None = None) -> Program:
    """The Datalog_Succ program of the tree; ``None`` keeps ``cmax`` symbolic."""
    if c_max is not None and int(c_max) < 1:
        raise ValueError("c_max must be at least 1")
    return flatten_tree(p.root, p.n, tds_block(c_max), tds_shared(p.n), tds_helpers, ("2S", "W"))


def eval_tds(f: Formula, k: KripkeStructure, child_order=None, c_max: int | None = None) -> frozenset[str]:
    """States of ``k`` where ``f`` holds, computed through the successor fragment.

    ``c_max`` defaults to the number of states; larger values are allowed.
    """
    if c_max is None:
        c_max = k.n
    elif c_max < k.n:
        raise ValueError(f"c_max must be at least the number of states ({k.n})")
    g = to_pnf(f)
    missing = [a for a in atoms(g) if a not in k.ap]
    if missing:
        raise NotInFragmentError(f"atom {missing[0]!r} is not an atom of the structure")
    p = ctl_to_tds(g, k.ap)
    db = split_outdegree2(k, child_order)
    prog = flatten_tds(p, c_max)
    if p.n > len(k.ap):
        db.facts.declare("P0", 1)
    out = evaluate_succ(prog, db, c_max)
    return frozenset(t[0] for t in out.facts(prog.goal))


# -- arbitrary branching ----------------------------------------------------------------

_SIBLING_OK = (AtomLeaf, NegAtomLeaf, TopLeaf, AndOp, OrOp, AllUntilOp)


def _a(pred, *args):
    return Literal(Atom(pred, tuple(args)))


def _na(pred, *args):
    return Literal(Atom(pred, tuple(args)), negated=True)


def _r(head, args, *body):
    return Rule(Atom(head, tuple(args)), tuple(body))


def _sibling_block(node: Node, g: str, kids, helper):
    if isinstance(node, AllUntilOp):
        g1, g2 = kids
        b, nx = helper("B"), helper("N")
        return [
            _r(g, [X], _a(g2, X)),
            _r(g, [X], _a(g1, X), _a("S0", X, Y), _a(g, Y), _a(b, Y)),
            _r(b, [X], _a("W", X), _na(nx, X)),
            _r(b, [X], _a("Next", X, Y), _a(g, Y), _a(b, Y)),
            _r(nx, [X], _a("Next", X, Y)),
        ], {"W"}
    if isinstance(node, _SIBLING_OK):
        return tds_block(None)(node, g, kids, helper)
    raise TreeError(
        f"{type(node).__name__} has no translation over the first-child/next-sibling encoding"
    )


def _sibling_helpers(node: Node) -> tuple[str, ...]:
    return ("B", "N") if isinstance(node, AllUntilOp) else ()


def unbounded_au_translate(p1: TdsProgram, p2: TdsProgram) -> Program:
    """Universal until over the first-child (``S0``) / next-sibling (``Next``) encoding.

    ``B(x)`` holds when every sibling after ``x`` satisfies the goal.  The
    operands may use atoms, negated atoms, ``true``, conjunction, disjunction
    and nested universal untils.
    """
    if p1.n != p2.n:
        raise TreeError("operands must share the number of unary relations")
    root = AllUntilOp(p1.root, p2.root)
    for node in nodes(root):
        if not isinstance(node, _SIBLING_OK):
            raise TreeError(
                f"{type(node).__name__} has no translation over the first-child/next-sibling encoding"
            )
    n = p1.n

    def shared(name: str) -> list[Rule]:
        return pi_n(n, ("S0", "Next"))

    return flatten_tree(root, n, _sibling_block, shared, _sibling_helpers, ("W",))
