import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctlsurrogate import ctl
from ctlsurrogate.ctl import (
    AF, AG, AU, EU, EX, FALSE, TRUE, And, Atom, FormulaSyntaxError, Implies, Not, Or,
    format_formula, formula_length, generate_formula, parse_formula,
)

from .conftest import formulas, seeds

VOCAB = ("p0", "p1", "p2", "p3")


@pytest.mark.parametrize("text, expected", [
    ("AG (p -> AF q)", AG(Implies(Atom("p"), AF(Atom("q"))))),
    ("E [ p U q ]", EU(Atom("p"), Atom("q"))),
    ("A[p U q]", AU(Atom("p"), Atom("q"))),
    ("!p & q", And(Not(Atom("p")), Atom("q"))),
    ("p | q & r", Or(Atom("p"), And(Atom("q"), Atom("r")))),
    ("p & q | r", Or(And(Atom("p"), Atom("q")), Atom("r"))),
    ("p -> q -> r", Implies(Atom("p"), Implies(Atom("q"), Atom("r")))),
    ("p | q | r", Or(Or(Atom("p"), Atom("q")), Atom("r"))),
    ("EX p -> q", Implies(EX(Atom("p")), Atom("q"))),
    ("true & false", And(TRUE, FALSE)),
    ("!E[p U q] | AG(EX(true))", Or(Not(EU(Atom("p"), Atom("q"))), AG(EX(TRUE)))),
])
def test_parse(text, expected):
    assert parse_formula(text) == expected


@pytest.mark.parametrize("text, pos", [
    ("AG p ->", 7),
    ("p q", 2),
    ("(p & q", 0),
    ("p )", 2),
    ("E p", 0),
    ("E [ p ]", 6),
    ("p U q", 2),
    ("AG P", 3),
    ("p $ q", 2),
    ("", 0),
])
def test_parse_errors(text, pos):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula(text)
    assert exc.value.pos == pos


def test_format_examples():
    assert format_formula(EX(Atom("p"))) == "(EX (p))"
    assert format_formula(And(TRUE, Atom("p"))) == "((true) & (p))"
    assert format_formula(EU(Atom("p"), Atom("q"))) == "(E [ (p) U (q) ])"


def test_length_examples():
    assert formula_length(Atom("p")) == 1
    assert formula_length(parse_formula("AG (p -> AF q)")) == 5


def test_equality_and_hash():
    a = parse_formula("AG (p -> AF q)")
    b = parse_formula("AG(p->AF(q))")
    assert a == b and hash(a) == hash(b)
    assert a != parse_formula("AG (p -> AF r)")
    assert Atom("p") != Atom("q")
    assert EX(TRUE) != ctl.AX(TRUE)


@settings(max_examples=300)
@given(formulas(max_leaves=100))
def test_format_parse_roundtrip(phi):
    assert parse_formula(format_formula(phi)) == phi


@given(st.integers(1, 200), seeds)
def test_roundtrip_generated(length, seed):
    phi = generate_formula(length, VOCAB, seed)
    assert parse_formula(format_formula(phi)) == phi


def test_deep_formula_roundtrip():
    # a 5000-deep chain must not hit the recursion limit anywhere
    phi = Atom("p0")
    for i in range(5000):
        phi = (EX, Not, AG)[i % 3](phi)
    text = format_formula(phi)
    assert parse_formula(text) == phi
    assert formula_length(phi) == 5001
    assert ctl.formula_depth(phi) == 5001


@settings(max_examples=200)
@given(st.integers(1, 600), seeds)
def test_generator_exact_length(length, seed):
    phi = generate_formula(length, VOCAB, seed)
    assert formula_length(phi) == length
    assert ctl.atoms(phi) <= set(VOCAB)


def test_generator_exact_length_exhaustive():
    for length in range(1, 601):
        assert formula_length(generate_formula(length, VOCAB, length)) == length


def test_generator_small_shapes():
    for seed in range(50):
        leaf = generate_formula(1, VOCAB, seed)
        assert isinstance(leaf, (ctl.TrueConst, ctl.FalseConst, Atom))
        two = generate_formula(2, VOCAB, seed)
        assert isinstance(two, ctl.Unary) and not two.arg.children()


def test_generator_deterministic():
    assert generate_formula(500, VOCAB, 7) == generate_formula(500, VOCAB, 7)
    assert generate_formula(500, VOCAB, 7) != generate_formula(500, VOCAB, 8)


def test_generator_uses_every_constructor():
    seen = {type(n) for s in range(20) for n in ctl.preorder(generate_formula(200, VOCAB, s))}
    assert seen == {ctl.TrueConst, ctl.FalseConst, Atom, *ctl.UNARY_TYPES, *ctl.BINARY_TYPES}


def test_generator_invalid():
    with pytest.raises(ValueError):
        generate_formula(0, VOCAB, 1)
    with pytest.raises(ValueError):
        generate_formula(3, (), 1)


def test_from_preorder_rejects_malformed():
    with pytest.raises(ValueError):
        ctl.from_preorder([(And, None), (Atom, "p")])
    with pytest.raises(ValueError):
        ctl.from_preorder([(Atom, "p"), (Atom, "q")])
