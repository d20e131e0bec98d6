from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochlie.errors import ParseError, PoleError
from stochlie.polyalg import (
    Polynomial,
    RationalFunction,
    monomials_up_to,
    nullspace,
    parse_polynomial,
    parse_rational,
    rank,
    rref,
    solve_linear_over_Q,
    solve_linear_rf,
)

XY = ("x", "y")

coef = st.fractions(min_value=-5, max_value=5, max_denominator=6)
poly = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2)), coef, max_size=4
).map(lambda d: Polynomial(XY, d))


def test_parse_and_print():
    p = parse_polynomial("x^2 - 2*x*y + 3", XY)
    assert str(p) == "x^2 - 2*x*y + 3"
    assert p.degree() == 2
    assert p.terms[(1, 1)] == -2


def test_implicit_multiplication_and_greek_constants():
    p = parse_polynomial("2x y + σ", None, {"σ": Fraction(1, 2)})
    assert p == parse_polynomial("2*x*y + 1/2", XY)


def test_unicode_minus_and_power_operator():
    assert parse_polynomial("x**2 − 1", ("x",)) == parse_polynomial("x^2 - 1", ("x",))


def test_floats_rejected():
    with pytest.raises(TypeError):
        Polynomial.constant(0.5)


def test_unknown_symbol_reports_column():
    with pytest.raises(ParseError) as exc:
        parse_polynomial("x + z", ("x",))
    assert exc.value.column == 5


def test_rational_canonical_form():
    r = parse_rational("(x^2-1)/(2*x-2)", ("x",))
    assert r.is_polynomial()
    assert r == parse_rational("x/2 + 1/2", ("x",))


def test_rational_pole():
    with pytest.raises(PoleError):
        parse_rational("1/x", ("x",)).evaluate({"x": 0})


def test_quotient_rule():
    r = parse_rational("x/y", XY)
    assert r.derive("y") == parse_rational("-x/y^2", XY)


def test_subs_polynomial():
    p = parse_polynomial("x^2 - 2*x*y + 3", XY)
    assert p.subs({"x": parse_polynomial("y+1", ("y",))}) == parse_polynomial("4 - y^2", ("y",))


def test_evaluate_exact_and_float():
    p = parse_polynomial("x^2 - 2*x*y + 3", XY)
    assert p.evaluate({"x": 1, "y": 2}) == 0
    assert p.evaluate({"x": 1.5, "y": 2}) == pytest.approx(-0.75)


def test_monomials_grlex():
    assert monomials_up_to(XY, 2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_rref_rank_nullspace():
    rows, piv = rref([[1, 2], [2, 4]])
    assert piv == [0] and rank([[1, 2], [2, 4]]) == 1
    ns = nullspace([[1, 2, 3]], 3)
    assert len(ns) == 2
    for v in ns:
        assert v[0] + 2 * v[1] + 3 * v[2] == 0


def test_linear_solves():
    sol = solve_linear_over_Q([[1, 1], [1, -1]], [2, 0])
    assert sol.particular == (1, 1) and sol.unique
    assert solve_linear_over_Q([[1, 1], [1, 1]], [1, 2]) is None
    x = RationalFunction.variable("x", ("x",))
    assert solve_linear_rf([[x, 0], [0, 1]], [x * x, 1])[0] == x


@given(poly, poly, poly)
@settings(max_examples=60, deadline=None)
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - a == Polynomial.constant(0, XY)


@given(poly, poly)
@settings(max_examples=60, deadline=None)
def test_leibniz(a, b):
    for v in XY:
        assert (a * b).derive(v) == a.derive(v) * b + a * b.derive(v)


@given(poly, poly)
@settings(max_examples=40, deadline=None)
def test_rational_roundtrip(a, b):
    if b.is_zero():
        return
    r = RationalFunction(a, b)
    assert r * RationalFunction(b) == RationalFunction(a)
    # canonical: monic denominator
    assert r.den.leading_coefficient() == 1
