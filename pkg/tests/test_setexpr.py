import pytest
from hypothesis import given
from hypothesis import strategies as st

from onticlab.errors import TraceSyntaxError
from onticlab.nogo.setexpr import (
    MAX_ATOMS,
    Assertion,
    Atom,
    Empty,
    atoms_of,
    entails,
    inter,
    parse_assertion,
    parse_expr,
    union,
)

from oracles import brute_entails

ATOMS = [Atom("phi"), Atom("psi"), Atom("phi", "B1"), Atom("phi", "B1", "m=0"), Atom("psi", "B2", "m=1")]

exprs = st.recursive(
    st.sampled_from(ATOMS + [Empty()]),
    lambda inner: st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: inter(*xs)),
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: union(*xs)),
    ),
    max_leaves=6,
)
assertions = st.builds(Assertion, exprs, st.sampled_from(["=", "⊆"]), exprs)


@given(exprs)
def test_print_parse_round_trip(e):
    text = str(e)
    assert str(parse_expr(text)) == text


@given(st.lists(assertions, max_size=3), assertions)
def test_entailment_agrees_with_set_enumeration(premises, conclusion):
    atoms = sorted(set().union(*(atoms_of(a) for a in [*premises, conclusion])), key=str)
    assert entails(premises, conclusion) == brute_entails(premises, conclusion, atoms, universe=(0,))


def test_ascii_operators():
    a = parse_assertion("L[phi] & (L[psi] | L[x;o;m]) <= {}")
    assert a.rel == "⊆" and isinstance(a.rhs, Empty)
    assert parse_assertion("L[p;o;m] -> L[zero;o;m]").rel == "⟶"
    assert parse_assertion("L[p] != {}").rel == "≠"


def test_precedence():
    e = parse_expr("L[a] ∪ L[b] ∩ L[c]")
    assert str(e) == "L[a] ∪ L[b] ∩ L[c]"
    assert type(e).__name__ == "Union_"


@pytest.mark.parametrize("bad", ["L[phi", "L[] = ∅", "L[a;b;c;d] = ∅", "L[a] =", "L[a] = L[b] L[c]", "L[a] ? L[b]", "(L[a] = ∅"])
def test_syntax_errors(bad):
    with pytest.raises(TraceSyntaxError):
        parse_assertion(bad)


def test_classic_distribution_step():
    a, b, p = Atom("phi", "B1"), Atom("phi", "B2"), Atom("psi")
    cover = Assertion(union(a, b), "=", Atom("phi"))
    goal = Assertion(inter(Atom("phi"), p), "=", union(inter(a, p), inter(b, p)))
    assert entails([cover], goal)
    assert not entails([], goal)


def test_non_algebraic_relations_never_entail():
    a = Atom("x")
    assert not entails([], Assertion(a, "≠", Empty()))
    assert not entails([Assertion(a, "⟶", a)], Assertion(a, "=", a))


def test_atom_limit():
    many = [Atom(f"p{i}") for i in range(MAX_ATOMS + 1)]
    with pytest.raises(ValueError):
        entails([], Assertion(union(*many), "=", union(*many)))
