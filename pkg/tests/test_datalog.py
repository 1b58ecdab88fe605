import pytest
from hypothesis import given, strategies as st

from ctlog.datalog import (
    DatalogSyntaxError,
    NotStratifiableError,
    ProgramError,
    SortError,
    UnsafeRuleError,
    evaluate,
    evaluate_succ,
    evaluation_order,
    goal_ids,
    naive_evaluate,
    parse_program,
    render_program,
    stratify,
)
from ctlog.datalog.analysis import check_stratification
from ctlog.facts import FactStore, parse_facts

CHAIN = parse_facts("R(a,b). R(b,c). R(c,d). P(b). P(d).")


def _facts(store, pred):
    return store.facts(pred)


# -- syntax ---------------------------------------------------------------------


def test_parse_and_render_roundtrip():
    text = "% goal: G\nG(X) :- R(X,Y), !A(Y).\nA(X) :- P(X).\n"
    p = parse_program(text)
    assert p.goal == "G"
    assert parse_program(render_program(p)) == p


def test_counter_syntax_roundtrip():
    p = parse_program("C(X,1) :- P(X).\nC(X,N) :- R(X,Y), C(Y,N-1), N <= cmax.\n")
    assert parse_program(render_program(p)) == p


def test_syntax_error_position():
    with pytest.raises(DatalogSyntaxError) as e:
        parse_program("A(X) :- P(X).\nB(X) :- P(X)\n")
    assert e.value.line in (2, 3)


def test_unsafe_head_variable():
    with pytest.raises(UnsafeRuleError, match="Y"):
        parse_program("A(X,Y) :- P(X).")


def test_unsafe_negated_variable():
    with pytest.raises(UnsafeRuleError) as e:
        parse_program("A(X) :- P(X).\nB(X) :- P(X), !R(X,Y).")
    assert e.value.rule_index == 1


def test_counter_in_name_position_is_a_sort_error():
    with pytest.raises(SortError):
        parse_program("C(X,1) :- P(X).\nD(X) :- C(X,a).")
    with pytest.raises(SortError, match="mixes constants and counters"):
        parse_program("C(X,1) :- P(X).\nD(N) :- C(X,N), E(N,a), E(N,Y).\nE(a,a) :- P(a).")


# -- stratification ----------------------------------------------------------------


def test_minimal_strata_of_a_negation_chain():
    p = parse_program("A(X) :- E(X), !B(X).\nB(X) :- E(X), !C(X).\nC(X) :- D(X).\nD(X) :- E(X).")
    s = stratify(p)
    assert (s["C"], s["D"], s["B"], s["A"]) == (0, 0, 1, 2)
    check_stratification(p, s)


def test_negative_cycle_is_reported():
    p = parse_program("A(X) :- E(X), !B(X).\nB(X) :- E(X), !A(X).")
    with pytest.raises(NotStratifiableError) as e:
        stratify(p)
    assert set(e.value.cycle) == {"A", "B"}


def test_evaluation_order_respects_dependencies():
    p = parse_program("T(X,Y) :- R(X,Y).\nT(X,Z) :- R(X,Y), T(Y,Z).\nG(X) :- T(X,Y), !P(X).")
    assert evaluation_order(p) == [["T"], ["G"]]


def test_bad_stratification_is_rejected():
    p = parse_program("A(X) :- E(X), !B(X).\nB(X) :- E(X).")
    from ctlog.datalog import Stratification

    with pytest.raises(ProgramError):
        check_stratification(p, Stratification({"A": 0, "B": 0, "E": 0}))


# -- evaluation ---------------------------------------------------------------------


def test_transitive_closure():
    p = parse_program("T(X,Y) :- R(X,Y).\nT(X,Z) :- T(X,Y), R(Y,Z).")
    got = _facts(evaluate(p, CHAIN), "T")
    assert got == {("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")}


def test_negation_after_recursion():
    p = parse_program(
        "% goal: G\nT(X,Y) :- R(X,Y).\nT(X,Z) :- T(X,Y), R(Y,Z).\nH(X) :- T(X,Y), P(Y).\nG(X) :- R(X,Y), !H(X)."
    )
    assert _facts(evaluate(p, CHAIN), "G") == set()
    p2 = parse_program("H(X) :- R(X,Y), P(Y).\nG(X) :- R(X,Y), !H(X).")
    assert _facts(evaluate(p2, CHAIN), "G") == {("b",)}


def test_small_example_program():
    # A(x) <- R(x,y); G(x) <- not A(x), P(x); G(x) <- R(x,y), P(y)
    p = parse_program("A(X) :- R(X,Y).\nG(X) :- !A(X), P(X).\nG(X) :- R(X,Y), P(Y).")
    assert _facts(evaluate(p, CHAIN), "G") == {("a",), ("c",), ("d",)}


def test_goal_ids_matches_goal_relation():
    p = parse_program("G(X) :- R(X,Y), P(Y).")
    ids = goal_ids(p, CHAIN)
    assert {CHAIN.symbols.name(int(i)) for i in ids} == {"a", "c"}


def test_counters_measure_distance():
    p = parse_program("C(X,1) :- P(X).\nC(X,N) :- R(X,Y), C(Y,N-1), N <= cmax.")
    got = _facts(evaluate_succ(p, CHAIN, 2), "C")
    assert got == {("b", 1), ("d", 1), ("a", 2), ("c", 2)}
    assert _facts(evaluate_succ(p, CHAIN, 3), "C") == got | {("b", 3)}


def test_counter_program_needs_succ():
    p = parse_program("C(X,1) :- P(X).\nC(X,N) :- R(X,Y), C(Y,N-1).")
    with pytest.raises(ProgramError):
        evaluate(p, CHAIN)
    with pytest.raises(ProgramError):
        evaluate_succ(p, CHAIN, 0)


def test_empty_database():
    p = parse_program("G(X) :- R(X,Y), !P(Y).")
    out = evaluate(p, FactStore())
    assert _facts(out, "G") == set()


def test_cache_does_not_leak_between_databases():
    p = parse_program("T(X,Y) :- R(X,Y).\nT(X,Z) :- T(X,Y), R(Y,Z).")
    d = parse_facts("R(a,b).")
    assert len(_facts(evaluate(p, d), "T")) == 1
    d.add_facts("R", [("b", "c")])
    assert len(_facts(evaluate(p, d), "T")) == 3


# -- agreement with the naive evaluator on random programs ----------------------------

VARS = ("X", "Y", "Z")


@st.composite
def programs(draw):
    """Random safe, stratified programs over R/2, S/2, P/1, Q/1.

    IDB predicate ``I{k}`` may use ``I{j}`` positively for ``j <= k`` and
    negatively for ``j < k``.
    """
    arity = {"R": 2, "S": 2, "P": 1, "Q": 1}
    lines = []
    n_idb = draw(st.integers(1, 4))
    for k in range(n_idb):
        name = f"I{k}"
        arity[name] = draw(st.integers(1, 2))
        for _ in range(draw(st.integers(1, 3))):
            pos_choices = [p for p in arity if p != name or lines]
            body, bound = [], set()
            for _ in range(draw(st.integers(1, 3))):
                pred = draw(st.sampled_from(pos_choices))
                args = [draw(st.sampled_from(VARS)) for _ in range(arity[pred])]
                bound |= set(args)
                body.append(f"{pred}({','.join(args)})")
            bound = sorted(bound)
            for _ in range(draw(st.integers(0, 2))):
                pred = draw(st.sampled_from([p for p in arity if not p.startswith("I") or int(p[1:]) < k]))
                args = [draw(st.sampled_from(bound)) for _ in range(arity[pred])]
                body.append(f"!{pred}({','.join(args)})")
            head = [draw(st.sampled_from(bound)) for _ in range(arity[name])]
            lines.append(f"{name}({','.join(head)}) :- {', '.join(body)}.")
    return parse_program("\n".join(lines))


@st.composite
def stores(draw):
    consts = [f"c{i}" for i in range(draw(st.integers(1, 5)))]
    pairs = st.tuples(st.sampled_from(consts), st.sampled_from(consts))
    f = FactStore()
    for name in ("R", "S"):
        f.declare(name, 2)
        f.add_facts(name, draw(st.lists(pairs, max_size=10)))
    for name in ("P", "Q"):
        f.declare(name, 1)
        f.add_facts(name, [(c,) for c in draw(st.lists(st.sampled_from(consts), max_size=5))])
    return f


@given(programs(), stores())
def test_engine_agrees_with_naive_evaluation(p, d):
    fast = evaluate(p, d)
    slow = naive_evaluate(p, d)
    for pred in p.idb():
        assert fast.facts(pred) == slow[pred]


@given(stores())
def test_unary_and_edge_fast_paths_agree_with_naive(d):
    p = parse_program(
        "A(X) :- P(X), !Q(X).\n"
        "B(X) :- R(X,Y), P(Y), !Q(X).\n"
        "C(X,Y) :- R(X,Y), !P(X), Q(Y).\n"
        "D(Y) :- R(X,Y), A(X).\n"
        "E(X) :- S(X,Y), !B(Y), !D(X).\n"
        "F(X) :- F(Y), R(X,Y).\nF(X) :- Q(X).\n"
    )
    fast = evaluate(p, d)
    slow = naive_evaluate(p, d)
    for pred in p.idb():
        assert fast.facts(pred) == slow[pred]


@given(stores(), st.integers(1, 4))
def test_counter_engine_agrees_with_naive(d, c_max):
    p = parse_program(
        "C(X,1) :- P(X).\nC(X,N) :- R(X,Y), C(Y,N-1), N <= cmax.\n"
        "D(X,N) :- C(X,N), !Q(X).\nE(X) :- C(X,N), N <= 2.\n"
    )
    fast = evaluate_succ(p, d, c_max)
    slow = naive_evaluate(p, d, c_max)
    for pred in p.idb():
        assert fast.facts(pred) == slow[pred]


CLOSURES = [
    "T(X,Y) :- P(X), R(X,Y), P(Y).\nT(X,Y) :- P(X), R(X,U), T(U,Y).",
    "T(X,Y) :- R(X,Y), !Q(Y).\nT(X,Y) :- S(X,U), T(U,Y), Q(X), !P(U).",
    "T(X,Y) :- S(X,Y).\nT(X,Y) :- R(X,U), T(U,Y).",
    # left-linear: not the recognized shape, evaluated semi-naively
    "T(X,Y) :- R(X,Y).\nT(X,Y) :- T(X,U), R(U,Y).",
]


@pytest.mark.parametrize("text", CLOSURES)
@given(d=stores())
def test_closure_fast_path_agrees_with_naive(text, d):
    p = parse_program(text + "\nG(X) :- T(X,X).")
    fast = evaluate(p, d)
    slow = naive_evaluate(p, d)
    for pred in ("T", "G"):
        assert fast.facts(pred) == slow[pred]


def test_closure_fast_path_is_taken(monkeypatch):
    import ctlog.datalog.engine as engine

    taken = []
    real = engine._closure_group
    monkeypatch.setattr(engine, "_closure_group", lambda *a: taken.append(real(*a)) or taken[-1])
    evaluate(parse_program(CLOSURES[0]), CHAIN)
    evaluate(parse_program(CLOSURES[3]), CHAIN)
    assert taken == [True, False]
