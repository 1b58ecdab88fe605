"""Acceptance suite: one reported line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed in the
terminal summary (and immediately with ``-s``).
"""

import io
import itertools
import random
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ctlog.bench import growth_ratios, run_bench
from ctlog.cli import main as cli_main
from ctlog.ctl import AUt, depth, model_check, parse_formula, size, subformulas, to_enf, to_pnf
from ctlog.ctl.checker import truth_mask
from ctlog.datalog import evaluate, parse_program, stratify
from ctlog.datalog.engine import goal_ids
from ctlog.decision import CounterexampleFound, ExhaustedBound, Holds, bounded_contained, bounded_satisfiable, replays
from ctlog.enumeration import batch, iter_codes
from ctlog.generators import ALL_KINDS, ENF_KINDS, formula_corpus, random_database, random_std
from ctlog.kripke import db_to_kripke, domain_of, kripke_to_db, lexicographic, split_outdegree2, total_closure
from ctlog.std import ctl_to_std, flatten, isomorphic, recognize_std, std_to_ctl
from ctlog.tds import ctl_to_tds, flatten_tds

AP = ("p", "q")


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _goal(prog, d):
    return {s for (s,) in evaluate(prog, d).facts("G")}


@pytest.fixture(scope="module")
def std_corpus():
    """200 non-empty databases (R need not be total) and 100 trees of depth <= 3."""
    rng = random.Random(2024)
    dbs = []
    while len(dbs) < 200:
        d = random_database(rng, 5, 2)
        if domain_of(d):
            dbs.append(d)
    progs = [random_std(rng, 3, 2) for _ in range(100)]
    return dbs, progs


# -- 1 ---------------------------------------------------------------------------------


def test_translation_matches_model_checking_on_all_small_structures():
    t0 = time.perf_counter()
    codes = list(iter_codes(4, len(AP)))
    union = batch(codes, AP).union
    d = kripke_to_db(union)
    corpus = formula_corpus(500, 4, seed=7, kinds=ENF_KINDS)
    memo: dict = {}
    mismatches = 0
    for f in corpus:
        expected = np.flatnonzero(truth_mask(union, f, memo))
        if len(memo) > 300:
            memo.clear()  # each mask holds one entry per state of the union
        got = np.sort(goal_ids(flatten(ctl_to_std(f, AP)), d))
        mismatches += not np.array_equal(expected, got)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 300 and len(corpus) >= 500
    report(
        1, ok,
        f"{len(codes)} structures ({union.n} states) x {len(corpus)} formulas, "
        f"{mismatches} mismatches, {elapsed:.0f}s (limit 300s)",
    )
    assert mismatches == 0
    assert elapsed < 300


# -- 2 and 3 -----------------------------------------------------------------------------


def test_reverse_translation(std_corpus):
    dbs, progs = std_corpus
    mismatches = 0
    for p in progs:
        prog = flatten(p)
        for d in dbs:
            mismatches += _goal(prog, d) != model_check(db_to_kripke(d), std_to_ctl(p, d.ap))
    report(2, mismatches == 0, f"{len(dbs)} databases x {len(progs)} programs, {mismatches} mismatches")
    assert mismatches == 0


def test_total_closure_invariance(std_corpus):
    dbs, progs = std_corpus
    closed = [total_closure(d) for d in dbs]
    mismatches = 0
    for p in progs:
        prog = flatten(p)
        for d, c in zip(dbs, closed):
            mismatches += _goal(prog, d) != _goal(prog, c)
    # the three-rule example program, which is not itself a flattened tree
    loops = parse_program("A(X) :- R(X,Y).\nG(X) :- !A(X), P0(X).\nG(X) :- R(X,Y), P0(Y).")
    extra = sum(_goal(loops, d) != _goal(loops, c) for d, c in zip(dbs, closed))
    ok = mismatches == 0 and extra == 0
    report(
        3, ok,
        f"{len(dbs)} databases x {len(progs)} programs: {mismatches} mismatches; "
        f"self-loop example program: {extra} mismatches",
    )
    assert ok


# -- 4 ------------------------------------------------------------------------------------


def _pnf_corpus():
    shallow = lambda f: depth(to_pnf(f)) <= 3  # noqa: E731
    has_tilde = lambda f: any(isinstance(g, AUt) for g in subformulas(to_pnf(f)))  # noqa: E731
    out = dict.fromkeys(to_pnf(f) for f in formula_corpus(250, 3, 11, kinds=ALL_KINDS, require=shallow))
    tilde = formula_corpus(80, 3, 12, kinds=ALL_KINDS, require=lambda f: shallow(f) and has_tilde(f))
    out.update(dict.fromkeys(to_pnf(f) for f in tilde))
    return list(out)


def test_successor_fragment_on_outdegree_two_structures():
    corpus = _pnf_corpus()
    with_tilde = sum(any(isinstance(g, AUt) for g in subformulas(f)) for f in corpus)
    # counters only count within one component, so the bound per union is its part size
    unions = []
    total = 0
    for n in range(1, 5):
        codes = list(iter_codes(n, len(AP), min_states=n, max_outdegree=2))
        total += len(codes)
        k = batch(codes, AP).union
        orders = (lexicographic(k), np.arange(k.n)[::-1].copy())
        unions.append((n, k, [split_outdegree2(k, o) for o in orders]))
    mismatches = 0
    for f in corpus:
        p = ctl_to_tds(f, AP)
        for n, k, dbs in unions:
            expected = np.flatnonzero(truth_mask(k, f))
            prog = flatten_tds(p, n)
            for d in dbs:
                mismatches += not np.array_equal(expected, np.sort(goal_ids(prog, d, n)))
    ok = mismatches == 0 and len(corpus) >= 300 and with_tilde >= 50
    report(
        4, ok,
        f"{total} structures x {len(corpus)} formulas ({with_tilde} with A~U) x 2 child orders, "
        f"{mismatches} mismatches",
    )
    assert ok


# -- 5 -------------------------------------------------------------------------------------


def test_normal_forms_preserve_truth():
    codes = list(iter_codes(3, len(AP)))
    union = batch(codes, AP).union
    corpus = formula_corpus(1000, 4, seed=5, kinds=ALL_KINDS)
    mismatches = 0
    for f in corpus:
        m = truth_mask(union, f)
        mismatches += not np.array_equal(m, truth_mask(union, to_enf(f)))
        mismatches += not np.array_equal(m, truth_mask(union, to_pnf(f)))
    report(5, mismatches == 0, f"{len(corpus)} formulas x {len(codes)} structures, {mismatches} mismatches")
    assert mismatches == 0


# -- 6 and 7 ----------------------------------------------------------------------------------


def _std_programs():
    rng = random.Random(99)
    return [random_std(rng, 4, rng.randint(1, 3)) for _ in range(500)]


def test_round_trips():
    corpus = formula_corpus(1000, 5, seed=3, kinds=ENF_KINDS)
    bad_f = sum(std_to_ctl(ctl_to_std(f)) != f for f in corpus)
    progs = _std_programs()
    bad_p = sum(not isomorphic(recognize_std(flatten(p)).root, p.root) for p in progs)
    ok = bad_f == 0 and bad_p == 0
    report(
        6, ok,
        f"formula round trip {len(corpus) - bad_f}/{len(corpus)}, "
        f"recognizer round trip {len(progs) - bad_p}/{len(progs)}",
    )
    assert ok


def test_linear_size_bounds():
    formulas = formula_corpus(500, 4, seed=7, kinds=ENF_KINDS) + formula_corpus(1000, 5, seed=3, kinds=ENF_KINDS)
    worst = 0.0
    over_rules = 0
    for f in formulas:
        p = ctl_to_std(f, AP)
        rules = len(flatten(p))
        over_rules += rules > 8 * size(f) + p.n + 2
        worst = max(worst, rules / (8 * size(f) + p.n + 2))
    progs = _std_programs()
    over_size = sum(size(std_to_ctl(p)) > p.size() for p in progs)
    ok = over_rules == 0 and over_size == 0
    report(
        7, ok,
        f"rules <= 8|f|+(n+2) on {len(formulas)} formulas (max ratio {worst:.2f}), "
        f"|formula| <= nodes on {len(progs)} programs; {over_rules + over_size} violations",
    )
    assert ok


# -- 8 -----------------------------------------------------------------------------------------

EXAMPLE_EG = """
G1(X) :- W(X).
G2(X) :- W(X), !G1(X).
G3(X) :- P0(X).
G(X) :- G2(X), G3(X).
G(X) :- B(X,X).
G(X) :- G3(X), R(X,Y), G(Y).
B(X,Y) :- G3(X), R(X,Y), G3(Y).
B(X,Y) :- G3(X), R(X,U), B(U,Y).
W(X) :- R(X,Y).
W(X) :- R(Y,X).
W(X) :- P0(X).
"""


def _rules(program, rename):
    out = set()
    for r in program.rules:
        def lit(a, neg=False):
            return ("!" if neg else "") + rename.get(a.pred, a.pred) + str(tuple(t.name for t in a.args))
        body = sorted(lit(item.atom, item.negated) for item in r.body)
        out.add((lit(r.head), tuple(body)))
    return out


def test_example_fidelity():
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["translate", "ctl2std", "--formula", "E[ false ~U p ]"])
    ours = parse_program(buf.getvalue())
    listed = _rules(parse_program(EXAMPLE_EG, goal="G"), {})
    # search for a renaming of our derived predicates onto the listed ones
    names = sorted(ours.idb() - {"G", "A", "W"})
    match = None
    for perm in itertools.permutations(names):
        rename = dict(zip(names, perm))
        got = _rules(ours, rename)
        if listed <= got:
            match = (rename, got - listed)
            break
    # the listing omits the tilde operator's no-successor rule and A's definition
    expected_extra = {("G('X',)", ("!A('X',)", "G3('X',)")), ("A('X',)", ("R('X', 'Y')",))}
    same = match is not None and match[1] == expected_extra
    strata = stratify(parse_program("A :- !B.\nB :- !C.\nC :- D."))
    strata_ok = (strata["C"], strata["D"], strata["B"], strata["A"]) == (0, 0, 1, 2)
    ok = code == 0 and same and strata_ok
    report(
        8, ok,
        f"E[false ~U p]: listed rules found under renaming {match[0] if match else None} plus "
        f"{len(match[1]) if match else '?'} rules for states without successors; strata C=D=0, B=1, A=2: {strata_ok}",
    )
    assert ok


# -- 9 -------------------------------------------------------------------------------------------

SATISFIABLE = [
    "true", "p", "!p", "p & q", "p & !q", "!p & !q", "EX p & !p", "AX p & !p",
    "E[ p U q ] & !q", "A[ p U q ] & !q", "E[ false ~U p ]", "A[ false ~U p ] & !q",
    "EX p & EX !p", "E[ true U p ] & AX !p", "!E[ true U p ]", "E[ p ~U q ] & !p",
    "EX EX p & !p & AX !p", "A[ q ~U p ] & EX !p", "E[ !p U p & q ]", "AX (p & !q) & EX EX q",
]
CONTRADICTIONS = [
    "p & !p", "false", "EX false", "AX p & AX !p & EX true", "E[ p U q ] & !q & !p",
    "A[ false ~U p ] & !p", "EX p & AX !p", "!E[ true U true ]", "q & !E[ p U q ]", "E[ false ~U false ]",
]


def test_bounded_decisions():
    found = [bounded_satisfiable(parse_formula(s), 3) for s in SATISFIABLE]
    sat_ok = sum(isinstance(v, Holds) and v.structure.n <= 3 for v in found)
    exhausted = sum(isinstance(bounded_satisfiable(parse_formula(s), 3), ExhaustedBound) for s in CONTRADICTIONS)
    q, eq = parse_formula("q"), parse_formula("E[ true U q ]")
    up = bounded_contained(q, eq, 3)
    down = bounded_contained(eq, q, 3)
    contain_ok = isinstance(up, Holds) and isinstance(down, CounterexampleFound) and replays(down, eq, q)
    ok = sat_ok == len(SATISFIABLE) and exhausted == len(CONTRADICTIONS) and contain_ok
    report(
        9, ok,
        f"witnesses {sat_ok}/{len(SATISFIABLE)}, exhausted {exhausted}/{len(CONTRADICTIONS)}, "
        f"q <= E[true U q] holds, converse refuted with a "
        f"{down.structure.n if isinstance(down, CounterexampleFound) else '?'}-state counterexample",
    )
    assert ok


# -- 10 -------------------------------------------------------------------------------------------


def test_via_model_checking_grows_linearly():
    sizes = [1000, 2000, 4000, 8000, 16000]
    rows = run_bench(sizes, repeat=5)
    ratios = growth_ratios(rows, "via-ctl")
    ok = all(r <= 3.0 for r in ratios)
    shown = ", ".join(f"{r:.2f}" for r in ratios)
    report(10, ok, f"via-ctl time ratio per doubling 1k..16k transitions: {shown} (limit 3.0)")
    assert ok
