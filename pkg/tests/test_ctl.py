import itertools

import pytest
from hypothesis import given

from ctlog.ctl import (
    AU,
    AUt,
    AX,
    BOTTOM,
    EU,
    EUt,
    EX,
    TOP,
    And,
    Atom,
    FormulaSyntaxError,
    ModelCheckError,
    Not,
    Or,
    OracleBoundError,
    is_enf,
    is_pnf,
    model_check,
    parse_formula,
    render_formula,
    size,
    to_enf,
    to_pnf,
    truth_oracle,
)
from ctlog.enumeration import structures
from ctlog.kripke import KripkeStructure
from strategies import formulas, kripke_structures

p, q, t = Atom("p"), Atom("q"), Atom("t")


# -- parsing and printing ---------------------------------------------------------


def test_parse_ex():
    assert parse_formula("EX p") == EX(p)


def test_parse_conjunction_of_until_and_next():
    assert parse_formula("E[ q U t ] & EX p") == And(EU(q, t), EX(p))


def test_parse_until_tilde_with_false():
    assert parse_formula("E[ false ~U p ]") == EUt(BOTTOM, p)


def test_precedence_not_and_or():
    assert parse_formula("!p & q | p") == Or(And(Not(p), q), p)


def test_parse_comment_and_whitespace():
    assert parse_formula("A[ p ~U q ]  # trailing\n") == AUt(p, q)


@pytest.mark.parametrize("text", ["E[ p U ]", "p &", "EX", "P", "E[ p W q ]", "(p"])
def test_syntax_errors_have_positions(text):
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula(text)
    assert e.value.line == 1 and e.value.column >= 1


def test_syntax_error_on_second_line():
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula("p &\n  & q")
    assert e.value.line == 2


def test_render_examples():
    assert render_formula(TOP) == "true"
    assert render_formula(EX(p)) == "EX p"
    assert render_formula(AUt(p, q)) == "A[ p ~U q ]"


@given(formulas())
def test_render_parse_roundtrip(f):
    assert parse_formula(render_formula(f)) == f


# -- normal forms -------------------------------------------------------------------


def test_enf_of_all_until():
    assert to_enf(AU(p, q)) == Not(EUt(Not(p), Not(q)))


def test_enf_of_false():
    assert to_enf(BOTTOM) == Not(TOP)


def test_enf_identity_on_enf():
    assert to_enf(EU(p, q)) == EU(p, q)


def test_pnf_examples():
    assert to_pnf(Not(EU(p, q))) == AUt(Not(p), Not(q))
    assert to_pnf(Not(Not(p))) == p
    assert to_pnf(Not(And(p, EX(q)))) == Or(Not(p), AX(Not(q)))


def test_pnf_example_preserves_truth_on_small_structures():
    f = Not(And(p, EX(q)))
    g = to_pnf(f)
    for k in structures(3, ("p", "q")):
        assert truth_oracle(k, f) == truth_oracle(k, g)


@given(formulas())
def test_normal_forms_are_in_their_fragment(f):
    assert is_enf(to_enf(f))
    assert is_pnf(to_pnf(f))


@given(formulas())
def test_enf_blowup_is_linear(f):
    # each rewrite adds at most two negations per node
    assert size(to_enf(f)) <= 3 * size(f)


@given(formulas(), kripke_structures(max_states=4))
def test_normal_forms_preserve_truth(f, k):
    truth = model_check(k, f)
    assert model_check(k, to_enf(f)) == truth
    assert model_check(k, to_pnf(f)) == truth


# -- model checking -------------------------------------------------------------------


def test_true_holds_everywhere(two_state):
    assert model_check(two_state, TOP) == {"a", "b"}


def test_reachability(two_state):
    assert model_check(two_state, EU(TOP, p)) == {"a", "b"}


def test_eg_via_until_tilde(two_state):
    assert model_check(two_state, EUt(BOTTOM, p)) == {"b"}


def test_unknown_atom_is_an_error(two_state):
    with pytest.raises(ModelCheckError):
        model_check(two_state, q)


def test_non_total_structure_is_an_error():
    k = KripkeStructure.build(["a", "b"], [("a", "b")], {}, ["p"])
    with pytest.raises(ModelCheckError, match="not total"):
        model_check(k, p)


@given(formulas(), kripke_structures(max_states=4))
def test_checker_agrees_with_oracle(f, k):
    assert model_check(k, f) == truth_oracle(k, f)


@given(formulas(), kripke_structures(max_states=4))
def test_negation_complements(f, k):
    assert model_check(k, Not(f)) == k.states - model_check(k, f)


@given(formulas(max_leaves=6), formulas(max_leaves=6), kripke_structures(max_states=4))
def test_all_until_duality(f, g, k):
    assert model_check(k, AU(f, g)) == k.states - model_check(k, EUt(Not(f), Not(g)))


# -- the brute-force oracle -------------------------------------------------------------


def test_oracle_self_loop():
    k = KripkeStructure.build(["s"], [("s", "s")], {"s": ["p"]}, ["p"])
    assert truth_oracle(k, EX(p)) == {"s"}
    assert truth_oracle(k, AUt(p, p)) == {"s"}


def test_oracle_two_cycle_without_invariant():
    k = KripkeStructure.build(["a", "b"], [("a", "b"), ("b", "a")], {"a": ["p"]}, ["p"])
    assert truth_oracle(k, EUt(BOTTOM, p)) == frozenset()


def test_oracle_refuses_large_structures():
    names = [f"s{i}" for i in range(7)]
    k = KripkeStructure.build(names, [(a, a) for a in names], {}, ["p"])
    with pytest.raises(OracleBoundError):
        truth_oracle(k, p)


def test_oracle_and_checker_on_every_two_state_structure():
    fs = [EUt(p, q), AUt(p, q), AU(p, q), EU(Not(p), q), AX(Or(p, q)), EX(And(p, Not(q)))]
    for k, f in itertools.product(structures(2, ("p", "q")), fs):
        assert model_check(k, f) == truth_oracle(k, f)
