import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndmall.formula import (
    FormulaSyntaxError,
    NWith,
    Neg,
    Par,
    Plus,
    Pos,
    Tensor,
    With,
    big,
    dual,
    parse_formula,
    print_formula,
    print_sequent,
    size,
)

atoms = st.sampled_from(["a", "b", "c", "x1", "long_name"])
literals = st.one_of(atoms.map(Pos), atoms.map(Neg))
formulas = st.recursive(
    literals,
    lambda sub: st.one_of(*[st.tuples(sub, sub).map(lambda t, c=c: c(*t)) for c in (Tensor, Par, With, Plus, NWith)]),
    max_leaves=40,
)

SWAP = {Tensor: Par, Par: Tensor, With: Plus, Plus: With, NWith: NWith}


def depth(f):
    if isinstance(f, (Pos, Neg)):
        return 0
    return 1 + max(depth(f.left), depth(f.right))


def test_dual_examples():
    assert dual(parse_formula("a")) == parse_formula("~a")
    assert dual(parse_formula("(a * b)")) == parse_formula("(~a @ ~b)")
    assert dual(parse_formula("(a ^ b)")) == parse_formula("(~a ^ ~b)")


def test_parse_examples():
    assert parse_formula("(a * ~b)") == Tensor(Pos("a"), Neg("b"))
    assert parse_formula("((a ^ a) & b)") == With(NWith(Pos("a"), Pos("a")), Pos("b"))
    assert parse_formula("  ( a+\n b )") == Plus(Pos("a"), Pos("b"))


def test_negation_of_compound_rejected():
    with pytest.raises(FormulaSyntaxError, match="negation only on atoms"):
        parse_formula("~(a*b)")


@pytest.mark.parametrize("text", ["", "(a * b", "(a b)", "a * b", "(a ? b)", "A", "(a * b))", "~~a", "1a"])
def test_malformed_formulas_rejected(text):
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula(text)
    assert err.value.pos >= 0


def test_print_examples():
    assert print_formula(Tensor(Pos("a"), Pos("b"))) == "(a * b)"
    assert print_formula(NWith(Neg("a"), Neg("b"))) == "(~a ^ ~b)"
    assert print_formula(Par(With(Pos("a"), Pos("b")), Pos("c"))) == "((a & b) @ c)"
    assert print_sequent([Pos("a"), Neg("a")]) == "|- a, ~a"


def test_atom_names_validated():
    with pytest.raises(ValueError):
        Pos("Bad")
    with pytest.raises(ValueError):
        Neg("")


def test_big_is_right_nested():
    a, b, c = Pos("a"), Pos("b"), Pos("c")
    assert big(Plus, [a, b, c]) == Plus(a, Plus(b, c))
    assert big(NWith, [a]) == a
    with pytest.raises(ValueError):
        big(Plus, [])
    assert size(big(Plus, [a, b, c])) == 5


@given(formulas)
@settings(max_examples=300)
def test_dual_is_an_involution(f):
    assert dual(dual(f)) == f


def test_involution_on_deep_formulas():
    import random

    from netgen import random_formula

    rng = random.Random(7)
    seen = 0
    for _ in range(200):
        f = random_formula(rng, 8, (Tensor, Par, With, Plus, NWith))
        if depth(f) >= 6:
            seen += 1
            assert dual(dual(f)) == f
            assert parse_formula(print_formula(f)) == f
    assert seen > 20


@given(formulas, formulas)
def test_nwith_is_self_dual(f, g):
    assert dual(NWith(f, g)) == NWith(dual(f), dual(g))


@given(formulas)
def test_dual_swaps_connectives_everywhere(f):
    d = dual(f)
    if isinstance(f, Pos):
        assert d == Neg(f.name)
    elif isinstance(f, Neg):
        assert d == Pos(f.name)
    else:
        assert type(d) is SWAP[type(f)]
        assert d.left == dual(f.left) and d.right == dual(f.right)


@given(formulas)
@settings(max_examples=300)
def test_parse_print_round_trip(f):
    assert parse_formula(print_formula(f)) == f
