"""Static checks: safety, argument sorts, dependency graph and stratification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import networkx as nx

from .syntax import CMax, Const, Int, Leq, Pred, Program, Rule, Var, atom_vars, term_vars


class ProgramError(ValueError):
    """A program violates a static requirement."""


class UnsafeRuleError(ProgramError):
    def __init__(self, message: str, rule_index: int):
        super().__init__(f"rule {rule_index}: {message}")
        self.rule_index = rule_index


class SortError(ProgramError):
    pass


class NotStratifiableError(ProgramError):
    def __init__(self, cycle: list[str]):
        super().__init__("not stratifiable: negation on the cycle " + " -> ".join(cycle))
        self.cycle = cycle


# -- safety -------------------------------------------------------------------


def unsafe_variables(r: Rule) -> set[Var]:
    """Variables of the head, negated literals and constraints not bound positively."""
    bound: set[Var] = set()
    for a in r.positive():
        bound |= atom_vars(a)
    needed = atom_vars(r.head)
    for a in r.negative():
        needed |= atom_vars(a)
    for item in r.body:
        if isinstance(item, Leq):
            needed.add(item.var)
    return needed - bound


def check_safety(p: Program, where: Callable[[int], tuple[int, int]] | None = None) -> None:
    for i, r in enumerate(p.rules):
        bad = unsafe_variables(r)
        if bad:
            names = ", ".join(sorted(v.name for v in bad))
            loc = ""
            if where is not None:
                line, col = where(i)
                loc = f" (line {line}, column {col})"
            raise UnsafeRuleError(f"unsafe variable(s) {names}{loc}", i)


# -- sorts ----------------------------------------------------------------------

CONST, COUNTER = "const", "counter"


def argument_sorts(p: Program, edb_counter_cols: dict[str, frozenset[int]] | None = None):
    """Infer for each (predicate, position) whether it holds constants or counters.

    Integer literals, ``cmax`` and ``N-1`` terms are counters; symbolic
    constants are constants; variables propagate sorts between positions.
    Raises SortError on a clash.
    """
    sorts: dict[tuple[str, int], str] = {}
    for pred, cols in (edb_counter_cols or {}).items():
        for c in cols:
            sorts[(pred, c)] = COUNTER

    def put(key, sort, what):
        old = sorts.get(key)
        if old is not None and old != sort:
            raise SortError(f"{what} mixes constants and counters")
        sorts[key] = sort

    changed = True
    while changed:
        changed = False
        before = dict(sorts)
        for i, r in enumerate(p.rules):
            var_sort: dict[Var, str] = {}

            def note(v: Var, sort: str):
                old = var_sort.get(v)
                if old is not None and old != sort:
                    raise SortError(f"rule {i}: variable {v.name} used as constant and counter")
                var_sort[v] = sort

            for item in r.body:
                if isinstance(item, Leq):
                    note(item.var, COUNTER)
            for a in (r.head, *r.atoms()):
                for j, t in enumerate(a.args):
                    key = (a.pred, j)
                    if isinstance(t, (Int, CMax, Pred)):
                        put(key, COUNTER, f"rule {i}: argument {j + 1} of {a.pred}")
                        for v in term_vars(t):
                            note(v, COUNTER)
                    elif isinstance(t, Const):
                        put(key, CONST, f"rule {i}: argument {j + 1} of {a.pred}")
                    elif key in sorts:
                        note(t, sorts[key])
            for a in (r.head, *r.atoms()):
                for j, t in enumerate(a.args):
                    if isinstance(t, Var) and t in var_sort:
                        put((a.pred, j), var_sort[t], f"rule {i}: argument {j + 1} of {a.pred}")
        changed = sorts != before
    return sorts


def check_arities(p: Program) -> dict[str, int]:
    arity: dict[str, int] = {}
    for i, r in enumerate(p.rules):
        for a in (r.head, *r.atoms()):
            old = arity.setdefault(a.pred, a.arity)
            if old != a.arity:
                raise ProgramError(f"rule {i}: {a.pred} used with arities {old} and {a.arity}")
    return arity


def check_program(p: Program, where: Callable[[int], tuple[int, int]] | None = None) -> None:
    check_arities(p)
    check_safety(p, where)
    argument_sorts(p)
    for r in p.rules:
        for t in r.head.args:
            if isinstance(t, Pred):
                raise SortError("counter expressions are not allowed in rule heads")


def is_connected(r: Rule) -> bool:
    """Whether the variables of the rule are linked through its positive atoms.

    A program whose rules are all connected (and free of constants) evaluates
    on a disjoint union of databases to the union of its results.
    """
    pos = [atom_vars(a) for a in r.positive()]
    allv = set().union(*pos) if pos else set()
    if not allv:
        return True
    start = next(iter(allv))
    seen = {start}
    grew = True
    while grew:
        grew = False
        for vs in pos:
            if vs & seen and not vs <= seen:
                seen |= vs
                grew = True
    return seen == allv


def union_safe(p: Program) -> bool:
    """Connected rules, no constants, every head has a variable or is ground-free."""
    for r in p.rules:
        if not is_connected(r):
            return False
        for a in (r.head, *r.atoms()):
            if any(isinstance(t, Const) for t in a.args):
                return False
        if not any(isinstance(t, Var) for t in r.head.args):
            return False
    return True


# -- dependency graph and strata ---------------------------------------------


def dependency_graph(p: Program) -> nx.DiGraph:
    """Arcs ``B -> G`` between IDB predicates when B occurs in a rule for G.

    The arc attribute ``negative`` is true when some such occurrence is negated.
    """
    idb = p.idb()
    g = nx.DiGraph()
    g.add_nodes_from(sorted(idb))
    for r in p.rules:
        for item in r.body:
            if not hasattr(item, "atom"):
                continue
            b = item.atom.pred
            if b not in idb:
                continue
            neg = item.negated
            if g.has_edge(b, r.head.pred):
                g[b][r.head.pred]["negative"] |= neg
            else:
                g.add_edge(b, r.head.pred, negative=neg)
    return g


@dataclass(frozen=True)
class Stratification:
    strata: dict[str, int]

    def __getitem__(self, pred: str) -> int:
        return self.strata[pred]

    def levels(self) -> list[list[str]]:
        """IDB predicates grouped by stratum, lowest first."""
        out: dict[int, list[str]] = {}
        for pred, s in self.strata.items():
            out.setdefault(s, []).append(pred)
        return [sorted(out[s]) for s in sorted(out)]

    @property
    def count(self) -> int:
        return 1 + max(self.strata.values(), default=-1)


def _negative_cycle(g: nx.DiGraph, component: set[str]) -> list[str]:
    sub = g.subgraph(component)
    for b, h, data in sub.edges(data=True):
        if data["negative"]:
            path = nx.shortest_path(sub, h, b)
            return [b, *path]
    raise AssertionError("no negative arc in component")


def stratify(p: Program) -> Stratification:
    """Minimal stratification: longest path counting negated arcs, EDB at 0."""
    g = dependency_graph(p)
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    comps = {c: cond.nodes[c]["members"] for c in cond.nodes}
    for c, preds in comps.items():
        sub = g.subgraph(preds)
        if any(d["negative"] for _, _, d in sub.edges(data=True)):
            raise NotStratifiableError(_negative_cycle(g, preds))
    level: dict[int, int] = {}
    for c in nx.topological_sort(cond):
        best = 0
        for pred in comps[c]:
            for b in g.predecessors(pred):
                cb = members[b]
                if cb == c:
                    continue
                best = max(best, level[cb] + (1 if g[b][pred]["negative"] else 0))
        level[c] = best
    strata = {pred: level[members[pred]] for pred in g.nodes}
    for e in p.edb():
        strata[e] = 0
    return Stratification(strata)


def evaluation_order(p: Program) -> list[list[str]]:
    """Groups of mutually recursive IDB predicates in a valid evaluation order.

    This refines the minimal stratification: every group lies within one
    stratum and all groups of lower strata come first.
    """
    g = dependency_graph(p)
    strat = stratify(p)
    cond = nx.condensation(g)
    comps = {c: sorted(cond.nodes[c]["members"]) for c in cond.nodes}
    order = list(nx.lexicographical_topological_sort(cond, key=lambda c: comps[c][0]))
    order.sort(key=lambda c: strat[comps[c][0]])  # stable: keeps topological order
    return [comps[c] for c in order]


def check_stratification(p: Program, s: Stratification) -> None:
    """Raise unless ``s`` satisfies the stratification conditions for ``p``."""
    for i, r in enumerate(p.rules):
        h = s.strata.get(r.head.pred)
        if h is None:
            raise ProgramError(f"stratum of {r.head.pred} missing")
        for item in r.body:
            if not hasattr(item, "atom"):
                continue
            b = item.atom.pred
            sb = s.strata.get(b, 0)
            if item.negated and not h > sb:
                raise ProgramError(f"rule {i}: {r.head.pred} must lie above negated {b}")
            if not item.negated and not h >= sb:
                raise ProgramError(f"rule {i}: {r.head.pred} must not lie below {b}")
