"""Reference evaluator: naive iteration over Python sets.

Deliberately simple and slow.  It shares only the syntax and the
stratification with the main engine and exists to cross-check it.
"""

from __future__ import annotations

from ..facts import FactStore
from .analysis import check_safety, stratify
from .syntax import CMax, Const, Int, Leq, Literal, Pred, Program, Var


def _match(args, tup, env, c_max):
    env = dict(env)
    for t, v in zip(args, tup):
        if isinstance(t, Var):
            if t in env:
                if env[t] != v:
                    return None
            else:
                env[t] = v
        elif isinstance(t, Pred):
            if not isinstance(v, int):
                return None
            if t.var in env:
                if env[t.var] - 1 != v:
                    return None
            else:
                env[t.var] = v + 1
        elif isinstance(t, Const):
            if v != t.name:
                return None
        elif isinstance(t, Int):
            if v != t.value:
                return None
        elif isinstance(t, CMax):
            if v != c_max:
                return None
    return env


def _ground(t, env, c_max):
    if isinstance(t, Var):
        return env[t]
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Int):
        return t.value
    if isinstance(t, CMax):
        return c_max
    return env[t.var] - 1


def _solutions(body, db, c_max):
    positives = [it for it in body if isinstance(it, Literal) and not it.negated]
    filters = [it for it in body if not (isinstance(it, Literal) and not it.negated)]

    def rec(i, env):
        if i == len(positives):
            for f in filters:
                if isinstance(f, Leq):
                    bound = c_max if isinstance(f.bound, CMax) else f.bound.value
                    if not env[f.var] <= bound:
                        return
                else:
                    tup = tuple(_ground(t, env, c_max) for t in f.atom.args)
                    if tup in db.get(f.atom.pred, ()):
                        return
            yield env
            return
        atom = positives[i].atom
        for tup in list(db.get(atom.pred, ())):
            e = _match(atom.args, tup, env, c_max)
            if e is not None:
                yield from rec(i + 1, e)

    yield from rec(0, {})


def naive_evaluate(program: Program, facts: FactStore, c_max: int | None = None) -> dict[str, set]:
    """IDB relations as sets of decoded tuples."""
    check_safety(program)
    db: dict[str, set] = {p: set(facts.facts(p)) for p in facts.predicates()}
    idb = program.idb()
    for p in idb:
        db[p] = set()
    for level in stratify(program).levels():
        preds = set(level) & idb
        rules = [r for r in program.rules if r.head.pred in preds]
        changed = True
        while changed:
            changed = False
            for r in rules:
                for env in list(_solutions(r.body, db, c_max)):
                    head = tuple(_ground(t, env, c_max) for t in r.head.args)
                    if c_max is not None and any(
                        isinstance(v, int) and not 1 <= v <= c_max for v in head
                    ):
                        continue
                    if head not in db[r.head.pred]:
                        db[r.head.pred].add(head)
                        changed = True
    return {p: db[p] for p in idb}
