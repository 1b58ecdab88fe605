import random

import pytest
from hypothesis import given, settings, strategies as st

from ctlog.ctl import TOP, And, Atom, Not, model_check, parse_formula, size, to_enf, to_pnf
from ctlog.datalog import evaluate
from ctlog.decision import (
    CounterexampleFound,
    ExhaustedBound,
    Holds,
    b_sat_reduction,
    bounded_contained,
    bounded_satisfiable,
    evaluate_std_via_ctl,
    find_model,
    replays,
    std_contained,
)
from ctlog.generators import random_database, random_std
from ctlog.kripke import RelationalDatabase
from ctlog.operators import AndOp, AtomLeaf
from ctlog.std import StdProgram, ctl_to_std, flatten
from strategies import formulas

p, q = Atom("p"), Atom("q")


# -- evaluation through the model checker --------------------------------------------


def test_via_ctl_atom():
    d = RelationalDatabase.build({"R": [("a", "b")]}, [["a"]])
    assert evaluate_std_via_ctl(StdProgram(AtomLeaf(0), 1), d).facts("G") == {("a",)}


def test_via_ctl_next_uses_closure():
    d = RelationalDatabase.build({"R": [("a", "b")]}, [["b"]])
    p0 = ctl_to_std(parse_formula("EX p0"), d.ap)
    got = evaluate_std_via_ctl(p0, d).facts("G")
    assert got == {("a",), ("b",)}
    assert got == evaluate(flatten(p0), d).facts("G")


def test_via_ctl_on_empty_database():
    d = RelationalDatabase.build({"R": []}, [[]])
    assert evaluate_std_via_ctl(StdProgram(AtomLeaf(0), 1), d).facts("G") == set()


def test_via_ctl_pads_missing_relations():
    d = RelationalDatabase.build({"R": [("a", "a")]}, [])
    prog = StdProgram(AndOp(AtomLeaf(0), AtomLeaf(1)), 2)
    assert evaluate_std_via_ctl(prog, d).facts("G") == set()


@given(st.integers(0, 2**32), st.integers(1, 3))
def test_via_ctl_agrees_with_datalog(seed, n):
    rng = random.Random(seed)
    prog = random_std(rng, 3, n)
    d = random_database(rng, 5, n)
    assert evaluate_std_via_ctl(prog, d).facts("G") == evaluate(flatten(prog), d).facts("G")


# -- satisfiability ------------------------------------------------------------------


def test_true_has_a_one_state_model():
    v = bounded_satisfiable(TOP, 1)
    assert isinstance(v, Holds) and v.complete
    assert v.structure.n == 1 and v.structure.trans == {("s0", "s0")}


def test_contradiction_exhausts():
    v = bounded_satisfiable(And(p, Not(p)), 3)
    assert isinstance(v, ExhaustedBound)
    assert v.bound == 3 and v.complete_at == 2 ** 4 and not v.complete


def test_next_witness_has_two_states():
    v = bounded_satisfiable(parse_formula("EX p & !p"), 3)
    assert isinstance(v, Holds)
    assert v.structure.n == 2
    assert v.state in model_check(v.structure, parse_formula("EX p & !p"))


def test_witness_is_first_in_enumeration_order():
    k, s = find_model(parse_formula("p & !q"), 2, ("p", "q"))
    assert (k.n, s) == (1, "s0")
    assert k.valuation == {"s0": {"p"}}


def test_bad_bound():
    with pytest.raises(ValueError):
        find_model(p, 0)


@settings(max_examples=25)
@given(formulas(max_leaves=6))
def test_normal_forms_agree_on_satisfiability(f):
    kinds = {type(bounded_satisfiable(g, 2, ("p", "q"))) for g in (f, to_enf(f), to_pnf(f))}
    assert len(kinds) == 1


@settings(max_examples=25)
@given(formulas(max_leaves=6))
def test_verdicts_are_monotone_in_the_bound(f):
    small = bounded_satisfiable(f, 2, ("p", "q"))
    if isinstance(small, Holds):
        big = bounded_satisfiable(f, 3, ("p", "q"))
        assert isinstance(big, Holds)
        assert (big.structure, big.state) == (small.structure, small.state)


# -- containment -----------------------------------------------------------------------


def test_reachability_contains_the_target():
    v = bounded_contained(q, parse_formula("E[ true U q ]"), 4)
    assert isinstance(v, Holds) and v.bound == 4


def test_reachability_not_contained_in_target():
    f1, f2 = parse_formula("E[ true U q ]"), q
    v = bounded_contained(f1, f2, 3)
    assert isinstance(v, CounterexampleFound)
    assert v.structure.n == 2
    assert replays(v, f1, f2)


def test_reflexive():
    f = parse_formula("A[ p ~U EX q ]")
    assert isinstance(bounded_contained(f, f, 2), Holds)


@settings(max_examples=30)
@given(formulas(max_leaves=5), formulas(max_leaves=5))
def test_counterexamples_replay(f1, f2):
    v = bounded_contained(f1, f2, 2, ("p", "q"))
    if isinstance(v, CounterexampleFound):
        assert replays(v, f1, f2)
    else:
        assert isinstance(v, Holds)


def test_program_containment():
    a, b = ctl_to_std(p, ("p", "q")), ctl_to_std(parse_formula("E[ true U p ]"), ("p", "q"))
    assert isinstance(std_contained(a, a, 2), Holds)
    assert isinstance(std_contained(a, b, 3), Holds)
    conj = StdProgram(AndOp(AtomLeaf(0), AtomLeaf(1)), 2, ("p", "q"))
    assert isinstance(std_contained(conj, a, 3), Holds)


def test_program_counterexample_is_a_database():
    a, b = ctl_to_std(p, ("p", "q")), ctl_to_std(q, ("p", "q"))
    v = std_contained(a, b, 2)
    assert isinstance(v, CounterexampleFound)
    g1 = evaluate(flatten(a), v.database).facts("G")
    g2 = evaluate(flatten(b), v.database).facts("G")
    assert (v.state,) in g1 - g2


# -- helper satisfiability -----------------------------------------------------------


def test_helper_reduction_shape():
    phi = parse_formula("E[ p ~U q ]")
    assert b_sat_reduction(phi, p) == parse_formula("E[ p ~U q ] & !E[ true U p ]")


def test_helper_reduction_with_false_operand():
    phi = to_enf(parse_formula("E[ false ~U p ]"))
    g = b_sat_reduction(phi, to_enf(parse_formula("false")))
    right = g.right
    v = bounded_contained(TOP, right, 3)
    assert isinstance(v, Holds)
    # the helper of the always-p program is satisfiable: any p-cycle
    w = bounded_satisfiable(g, 2)
    assert isinstance(w, Holds)
    assert size(g) > size(phi)
