import numpy as np
import pytest
from hypothesis import given

from ctlog.kripke import (
    KripkeStructure,
    KripkeSyntaxError,
    RelationalDatabase,
    SchemaError,
    StructureError,
    db_to_kripke,
    disjoint_union,
    domain_of,
    kripke_to_db,
    parse_database,
    parse_kripke,
    render_kripke,
    sibling_encoding,
    split_outdegree2,
    total_closure,
)
from strategies import kripke_structures

TEXT = """\
atoms p q
state a p     # start
state b q
edge a b
edge b b
edge b a
"""


def test_parse_kripke():
    k = parse_kripke(TEXT)
    assert k.states == {"a", "b"}
    assert k.trans == {("a", "b"), ("b", "b"), ("b", "a")}
    assert k.valuation == {"a": {"p"}, "b": {"q"}}
    assert k.ap == ("p", "q")


@pytest.mark.parametrize(
    "text,line",
    [
        ("state a\nstate a\n", 2),
        ("state a\nedge a z\n", 2),
        ("atoms p\nstate a q\n", 2),
        ("stat a\n", 1),
        ("state a P\n", 1),
    ],
)
def test_kripke_syntax_errors(text, line):
    with pytest.raises(KripkeSyntaxError) as e:
        parse_kripke(text)
    assert e.value.line == line


@given(kripke_structures(max_states=5))
def test_render_parse_roundtrip(k):
    assert parse_kripke(render_kripke(k)) == k


def test_build_rejects_unknown_state():
    with pytest.raises(StructureError):
        KripkeStructure.build(["a"], [("a", "b")])


def test_total_flag():
    k = KripkeStructure.build(["a", "b"], [("a", "b")])
    assert not k.total
    assert KripkeStructure.build(["a"], [("a", "a")]).total


def test_disjoint_union_offsets(two_state):
    u, offsets = disjoint_union([two_state, two_state])
    assert u.n == 4
    assert list(offsets) == [0, 2]
    assert u.trans == {("s0", "s1"), ("s1", "s1"), ("s2", "s3"), ("s3", "s3")}


# -- databases ------------------------------------------------------------------


def test_kripke_to_db(two_state):
    d = kripke_to_db(two_state)
    assert d.binary("R") == {("a", "b"), ("b", "b")}
    assert d.unary(0) == {"b"}
    assert d.ap == ("p",)


@given(kripke_structures(max_states=5))
def test_structure_database_roundtrip(k):
    assert db_to_kripke(kripke_to_db(k)) == k


def test_total_closure_adds_self_loops():
    d = RelationalDatabase.build({"R": [("a", "b")]}, [["c"]])
    closed = total_closure(d)
    assert closed.binary("R") == {("a", "b"), ("b", "b"), ("c", "c")}
    assert domain_of(d) == {"a", "b", "c"}


def test_db_to_kripke_closes_and_keeps_isolated_labelled_elements():
    d = RelationalDatabase.build({"R": [("a", "b")]}, [["c"]])
    k = db_to_kripke(d)
    assert k.total
    assert k.states == {"a", "b", "c"}
    assert k.valuation == {"a": set(), "b": set(), "c": {"p0"}}


def test_db_to_kripke_with_extra_atoms():
    d = RelationalDatabase.build({"R": [("a", "a")]}, [["a"]], ap=["x"])
    k = db_to_kripke(d, ("x", "y"))
    assert k.ap == ("x", "y")
    assert k.valuation == {"a": {"x"}}


def test_empty_database_has_no_structure():
    d = RelationalDatabase.build({"R": []}, [[]])
    with pytest.raises(StructureError):
        db_to_kripke(d)


def test_schema_rejects_foreign_predicates():
    from ctlog.facts import parse_facts

    with pytest.raises(SchemaError):
        RelationalDatabase(parse_facts("Q(a)."), ())
    with pytest.raises(SchemaError):
        RelationalDatabase(parse_facts("R(a,b). S0(a,b)."), ())


def test_parse_database_reads_atom_header():
    d = parse_database("% atoms: x y\nR(a,b).\nP1(b).\n")
    assert d.ap == ("x", "y")
    assert d.unary(1) == {"b"}
    assert parse_database(d.to_text()) == d


def test_parse_database_default_atom_names():
    assert parse_database("R(a,a). P2(a).").ap == ("p0", "p1", "p2")


# -- child encodings ------------------------------------------------------------


def test_split_outdegree2_by_name():
    k = KripkeStructure.build(["a", "b", "c"], [("a", "c"), ("a", "b"), ("b", "b"), ("c", "c")])
    d = split_outdegree2(k)
    assert d.binary("S0") == {("a", "b"), ("b", "b"), ("c", "c")}
    assert d.binary("S1") == {("a", "c")}


def test_split_outdegree2_custom_order():
    k = KripkeStructure.build(["a", "b", "c"], [("a", "c"), ("a", "b"), ("b", "b"), ("c", "c")])
    d = split_outdegree2(k, np.array([0, 2, 1]))
    assert d.binary("S0") == {("a", "c"), ("b", "b"), ("c", "c")}
    assert d.binary("S1") == {("a", "b")}


def test_split_outdegree2_rejects_wide_states():
    k = KripkeStructure.build(["a", "b", "c"], [("a", "a"), ("a", "b"), ("a", "c"), ("b", "b"), ("c", "c")])
    with pytest.raises(StructureError, match="outdegree 3"):
        split_outdegree2(k)


def test_sibling_encoding():
    k = KripkeStructure.build(
        ["r", "a", "b", "c", "z"],
        [("r", "a"), ("r", "b"), ("r", "c"), ("a", "z"), ("b", "z"), ("c", "z"), ("z", "z")],
    )
    d = sibling_encoding(k)
    assert d.binary("S0") == {("r", "a"), ("a", "z"), ("b", "z"), ("c", "z"), ("z", "z")}
    assert d.binary("Next") == {("a", "b"), ("b", "c")}


def test_sibling_encoding_rejects_shared_children():
    k = KripkeStructure.build(
        ["r", "s", "a", "b", "c"],
        [("r", "a"), ("r", "b"), ("s", "a"), ("s", "c"), ("a", "a"), ("b", "b"), ("c", "c")],
    )
    with pytest.raises(StructureError, match="inconsistent"):
        sibling_encoding(k)
