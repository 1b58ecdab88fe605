"""The stratified fragment: CTL formulas in existential form as Datalog trees."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .ctl.formula import (
    EU,
    EUt,
    EX,
    TOP,
    And,
    Atom as CAtom,
    Formula,
    Not,
    Top,
    atoms,
    is_enf,
)
from .datalog.syntax import Atom, Literal, Program, Rule, Var
from .operators import (
    STD_KINDS,
    AndOp,
    AtomLeaf,
    Node,
    NextOp,
    NotOp,
    TopLeaf,
    TreeError,
    UntilOp,
    UntilTildeOp,
    flatten_tree,
    make_node,
    node_children,
    node_count,
    nodes,
    std_block,
    std_helpers,
    std_shared,
    to_sexpr,
)


class NotInFragmentError(ValueError):
    pass


@dataclass(frozen=True)
class StdProgram:
    """An operator tree over the unary relations ``P0 .. P{n-1}``.

    ``ap`` optionally names the atoms behind the unary relations; it is used
    when converting back to a formula.
    """

    root: Node
    n: int
    ap: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for node in nodes(self.root):
            if not isinstance(node, STD_KINDS):
                raise TreeError(f"{type(node).__name__} is not an STD operator")
            if isinstance(node, AtomLeaf) and node.index >= self.n:
                raise TreeError(f"atom index {node.index} out of range for n={self.n}")

    def size(self) -> int:
        return node_count(self.root)

    def sexpr(self) -> str:
        return to_sexpr(self.root, self.ap or None)


def build_std(kind, children: list = (), n: int = 0, index: int | None = None) -> StdProgram:
    """One operator (or leaf) applied to sub-programs that share ``n``."""
    children = list(children)
    for c in children:
        if c.n != n:
            raise TreeError(f"sub-program has n={c.n}, expected {n}")
    ap = children[0].ap if children else ()
    return StdProgram(make_node(kind, [c.root for c in children], index), n, ap)


def ctl_to_std(f: Formula, ap: tuple[str, ...] | None = None) -> StdProgram:
    """Translate an existential-normal-form formula.

    ``ap`` fixes which unary relation each atom maps to (atom ``ap[i]`` to
    ``P{i}``); by default the formula's atoms in first-occurrence order.
    """
    if not is_enf(f):
        raise NotInFragmentError("formula is not in existential normal form; apply to_enf first")
    ap = tuple(ap) if ap is not None else atoms(f)
    index = {a: i for i, a in enumerate(ap)}

    def tr(g: Formula) -> Node:
        if isinstance(g, CAtom):
            if g.name not in index:
                raise NotInFragmentError(f"atom {g.name!r} missing from the atom list")
            return AtomLeaf(index[g.name])
        if isinstance(g, Top):
            return TopLeaf()
        if isinstance(g, Not):
            return NotOp(tr(g.arg))
        if isinstance(g, And):
            return AndOp(tr(g.left), tr(g.right))
        if isinstance(g, EX):
            return NextOp(tr(g.arg))
        if isinstance(g, EU):
            return UntilOp(tr(g.left), tr(g.right))
        if isinstance(g, EUt):
            return UntilTildeOp(tr(g.left), tr(g.right))
        raise NotInFragmentError(f"{type(g).__name__} has no STD counterpart")

    return StdProgram(tr(f), len(ap), ap)


def std_to_ctl(p: StdProgram, names: tuple[str, ...] | None = None) -> Formula:
    """The formula a tree expresses; atom ``i`` is named ``names[i]``, else ``p{i}``."""
    names = tuple(names) if names is not None else p.ap
    if len(names) < p.n:
        names = tuple(names) + tuple(f"p{i}" for i in range(len(names), p.n))

    def back(node: Node) -> Formula:
        if isinstance(node, AtomLeaf):
            return CAtom(names[node.index])
        if isinstance(node, TopLeaf):
            return TOP
        kids = [back(c) for c in node_children(node)]
        kind = {NotOp: Not, AndOp: And, NextOp: EX, UntilOp: EU, UntilTildeOp: EUt}[type(node)]
        return kind(*kids)

    return back(p.root)


def flatten(p: StdProgram) -> Program:
    """The Datalog program of the tree, with goal ``G``."""
    return flatten_tree(p.root, p.n, std_block, std_shared(p.n), std_helpers, ("A", "W"))


# -- s-expressions ------------------------------------------------------------------


def parse_sexpr(text: str, ap: tuple[str, ...] = ()) -> Node:
    """Read ``(until (atom p) (not (top)))``; atoms by name (looked up in ``ap``) or index."""
    from .operators import KINDS

    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def read() -> Node:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "(":
            raise TreeError("expected '('")
        pos += 1
        tag = tokens[pos]
        pos += 1
        if tag not in KINDS:
            raise TreeError(f"unknown operator {tag!r}")
        if tag in ("atom", "negatom"):
            label = tokens[pos]
            pos += 1
            idx = int(label) if label.isdigit() else (ap.index(label) if label in ap else None)
            if idx is None:
                raise TreeError(f"unknown atom {label!r}")
            node = make_node(tag, [], idx)
        else:
            kids = []
            while pos < len(tokens) and tokens[pos] == "(":
                kids.append(read())
            node = make_node(tag, kids)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise TreeError("expected ')'")
        pos += 1
        return node

    node = read()
    if pos != len(tokens):
        raise TreeError("trailing input after s-expression")
    return node


# -- recognizer ------------------------------------------------------------------------

# Rule templates per operator.  Predicate roles: "G" the node's goal, "1"/"2"
# the children, "B" its helper, "A"/"W" the shared predicates, "R" the EDB.
_TEMPLATES: dict[type, tuple[list[tuple], list[tuple]]] = {
    NotOp: ([("G", "x"), [("W", "x"), ("!1", "x")]],),
    AndOp: ([("G", "x"), [("1", "x"), ("2", "x")]],),
    NextOp: (
        [("G", "x"), [("1", "x"), ("!A", "x")]],
        [("G", "x"), [("R", "x", "y"), ("1", "y")]],
    ),
    UntilOp: (
        [("G", "x"), [("2", "x")]],
        [("G", "x"), [("1", "x"), ("R", "x", "y"), ("G", "y")]],
    ),
    UntilTildeOp: (
        [("G", "x"), [("1", "x"), ("2", "x")]],
        [("G", "x"), [("2", "x"), ("!A", "x")]],
        [("G", "x"), [("B", "x", "x")]],
        [("G", "x"), [("2", "x"), ("R", "x", "y"), ("G", "y")]],
        [("B", "x", "y"), [("2", "x"), ("R", "x", "y"), ("2", "y")]],
        [("B", "x", "y"), [("2", "x"), ("R", "x", "u"), ("B", "u", "y")]],
    ),
}


def _match_rule(rule: Rule, tmpl, roles: dict[str, str]) -> dict[str, str] | None:
    """Match a rule against a template under role bindings; returns extended roles."""
    (hrole, *hvars), body = tmpl
    if len(rule.body) != len(body) or len(rule.head.args) != len(hvars):
        return None
    if not all(isinstance(t, Var) for a in (rule.head, *rule.atoms()) for t in a.args):
        return None
    if any(not isinstance(it, Literal) for it in rule.body):
        return None

    def bind(roles, vmap, role, pred):
        if roles.get(role, pred) != pred:
            return None
        if role not in roles and pred in roles.values():
            return None
        r = dict(roles)
        r[role] = pred
        return r

    def bind_vars(vmap, tvars, args):
        vmap = dict(vmap)
        for tv, a in zip(tvars, args):
            if vmap.get(tv, a) != a:
                return None
            if tv not in vmap and a in vmap.values():
                return None
            vmap[tv] = a
        return vmap

    start = bind(roles, {}, hrole, rule.head.pred)
    if start is None:
        return None
    vstart = bind_vars({}, hvars, rule.head.args)
    if vstart is None:
        return None
    for perm in itertools.permutations(rule.body):
        r, v = start, vstart
        for lit, (trole, *tvars) in zip(perm, body):
            neg = trole.startswith("!")
            trole = trole.lstrip("!")
            if lit.negated != neg or lit.atom.arity != len(tvars):
                r = None
                break
            if trole == "R":
                if lit.atom.pred != "R":
                    r = None
                    break
            else:
                r = bind(r, v, trole, lit.atom.pred)
                if r is None:
                    break
            v = bind_vars(v, tvars, lit.atom.args)
            if v is None:
                r = None
                break
        if r is not None:
            return r
    return None


def _match_group(rules: list[Rule], templates, roles):
    """Assign each rule to a distinct template; returns the roles or None."""
    if len(rules) != len(templates):
        return None

    def rec(i, remaining, roles):
        if i == len(rules):
            return roles
        for k in remaining:
            r = _match_rule(rules[i], templates[k], roles)
            if r is not None:
                got = rec(i + 1, remaining - {k}, r)
                if got is not None:
                    return got
        return None

    return rec(0, frozenset(range(len(templates))), roles)


_P = re.compile(r"P(0|[1-9][0-9]*)")


def recognize_std(p: Program) -> StdProgram:
    """Recover the operator tree of a flattened STD program.

    Predicate names may differ from the ones :func:`flatten` chooses and
    rules and body literals may come in any order, but the EDB predicates
    must be ``R`` and ``P0, P1, ...``.
    """
    by_head: dict[str, list[Rule]] = {}
    for r in p.rules:
        by_head.setdefault(r.head.pred, []).append(r)
    for pred in by_head:
        if pred == "R" or _P.fullmatch(pred):
            raise NotInFragmentError(f"{pred} is reserved for input relations but heads a rule")
    shared: dict[str, str] = {}
    used: set[str] = set()

    def fail(msg, pred):
        rules = by_head.get(pred, [])
        from .datalog.parser import render_rule

        shown = "; ".join(render_rule(r) for r in rules) or "(no rules)"
        raise NotInFragmentError(f"not in STD: {msg} for {pred}: {shown}")

    def unify_shared(roles, pred):
        for role in ("A", "W"):
            if role in roles:
                if shared.setdefault(role, roles[role]) != roles[role]:
                    fail(f"inconsistent {role} predicate", pred)

    def rec(pred: str) -> Node:
        if pred in used:
            fail("predicate reused", pred)
        used.add(pred)
        rules = by_head.get(pred)
        if not rules:
            fail("no defining rules", pred)
        if len(rules) == 1:
            r = rules[0]
            body = r.body
            if (
                len(body) == 1
                and isinstance(body[0], Literal)
                and not body[0].negated
                and len(r.head.args) == 1
                and isinstance(r.head.args[0], Var)
                and body[0].atom.args == r.head.args
            ):
                q = body[0].atom.pred
                m = _P.fullmatch(q)
                if m and q not in by_head:
                    return AtomLeaf(int(m.group(1)))
                if q in by_head and _is_pi_n(by_head[q]) is not None:
                    if shared.setdefault("W", q) != q:
                        fail("inconsistent W predicate", pred)
                    return TopLeaf()
        base = {k: v for k, v in shared.items()}
        for kind, templates in _TEMPLATES.items():
            goal_rules = [r for r in rules]
            roles = dict(base)
            roles["G"] = pred
            helper_rules: list[Rule] = []
            if kind is UntilTildeOp:
                b = _helper_of(rules)
                if b is None or b not in by_head or b == pred:
                    continue
                helper_rules = by_head[b]
            got = _match_group(goal_rules + helper_rules, list(templates), roles)
            if got is None:
                continue
            if kind is UntilTildeOp:
                if got["B"] in used:
                    fail("helper reused", pred)
                used.add(got["B"])
            unify_shared(got, pred)
            kids = [got[k] for k in ("1", "2") if k in got]
            if any(k in ("A", "W", "B", pred) or k in shared.values() for k in kids):
                continue
            return make_node(kind, [rec(k) for k in kids])
        fail("no operator shape matches", pred)

    root = rec(p.goal)
    n = 0
    if "W" in shared:
        n = _is_pi_n(by_head.get(shared["W"], []))
        if n is None:
            fail("W must be defined by exactly the domain rules", shared["W"])
        used.add(shared["W"])
    else:
        idx = [node.index for node in nodes(root) if isinstance(node, AtomLeaf)]
        n = max(idx) + 1 if idx else 0
    if "A" in shared:
        a_rules = by_head.get(shared["A"], [])
        if len(a_rules) != 1 or _match_rule(a_rules[0], [("A", "x"), [("R", "x", "y")]], {"A": shared["A"]}) is None:
            fail("A must be defined by exactly the rule A(x) <- R(x,y)", shared["A"])
        used.add(shared["A"])
    extra = sorted(set(by_head) - used)
    if extra:
        fail("rules outside the operator tree", extra[0])
    for node in nodes(root):
        if isinstance(node, AtomLeaf) and node.index >= n:
            raise NotInFragmentError(f"not in STD: P{node.index} missing from the domain rules")
    return StdProgram(root, n)


def _helper_of(rules: list[Rule]) -> str | None:
    for r in rules:
        if len(r.body) == 1 and isinstance(r.body[0], Literal) and r.body[0].atom.arity == 2:
            a = r.body[0].atom
            if a.args[0] == a.args[1]:
                return a.pred
    return None


def _is_pi_n(rules: list[Rule]) -> int | None:
    """If the rules are exactly the domain rules over R and P0..P{n-1}, return n."""
    seen_fwd = seen_bwd = False
    ps: set[int] = set()
    for r in rules:
        if len(r.head.args) != 1 or len(r.body) != 1 or not isinstance(r.body[0], Literal):
            return None
        lit = r.body[0]
        x = r.head.args[0]
        if lit.negated or not isinstance(x, Var):
            return None
        a = lit.atom
        if a.pred == "R" and a.arity == 2 and all(isinstance(t, Var) for t in a.args) and a.args[0] != a.args[1]:
            if a.args[0] == x and not seen_fwd:
                seen_fwd = True
                continue
            if a.args[1] == x and not seen_bwd:
                seen_bwd = True
                continue
            return None
        m = _P.fullmatch(a.pred)
        if m and a.args == (x,) and int(m.group(1)) not in ps:
            ps.add(int(m.group(1)))
            continue
        return None
    if not (seen_fwd and seen_bwd) or ps != set(range(len(ps))):
        return None
    return len(ps)


def isomorphic(a: Node, b: Node) -> bool:
    """Equal up to swapping the operands of a conjunction."""
    if type(a) is not type(b):
        return False
    if isinstance(a, AtomLeaf):
        return a.index == b.index
    ka, kb = node_children(a), node_children(b)
    if all(isomorphic(x, y) for x, y in zip(ka, kb)):
        return True
    return isinstance(a, AndOp) and isomorphic(ka[0], kb[1]) and isomorphic(ka[1], kb[0])
