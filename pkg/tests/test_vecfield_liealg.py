from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochlie.errors import PoleError, UnknownVariableError
from stochlie.liealg import Bounds, closure, is_independent, same_span, span_membership, structure_constants
from stochlie.polyalg import Polynomial, parse_rational
from stochlie.vecfield import VectorField, lie_bracket, make_chart

XY = ("x", "y")


def vf(chart, *coeffs):
    return VectorField.parse(chart, list(coeffs))


GL2 = [vf(XY, "x", "0"), vf(XY, "y", "0"), vf(XY, "0", "x"), vf(XY, "0", "y")]

coef = st.fractions(min_value=-3, max_value=3, max_denominator=4)
poly = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), coef, max_size=3).map(lambda d: Polynomial(XY, d))
field_ = st.tuples(poly, poly).map(lambda c: VectorField(XY, list(c)))


def test_chart_rules():
    with pytest.raises(ValueError):
        make_chart(["t"])
    with pytest.raises(ValueError):
        make_chart(["x", "x"])


def test_bracket_oracle():
    assert lie_bracket(GL2[0], GL2[1]) == -GL2[1]


def test_apply_unknown_variable():
    with pytest.raises(UnknownVariableError):
        GL2[0].apply(parse_rational("z", ("z",)))


def test_evaluate_pole_names_component():
    X = vf(XY, "1", "1/x")
    with pytest.raises(PoleError, match="component 1"):
        X.evaluate((0, 1))


def test_dict_roundtrip():
    X = vf(XY, "x*y/(1+x^2)", "-3")
    assert VectorField.from_dict(X.to_dict()) == X


@given(field_, field_, field_)
@settings(max_examples=40, deadline=None)
def test_bracket_antisymmetry_and_jacobi(a, b, c):
    assert a.bracket(b) == -(b.bracket(a))
    jac = a.bracket(b.bracket(c)) + b.bracket(c.bracket(a)) + c.bracket(a.bracket(b))
    assert jac.is_zero()


def test_gl2_closure_relations():
    res = closure(GL2, labels=("X11", "X12", "X21", "X22"))
    assert res.closed and res.algebra.dim == 4
    assert res.algebra.format_relations() == [
        "[X11,X12] = -X12",
        "[X11,X21] = X21",
        "[X11,X22] = 0",
        "[X12,X21] = -X11 + X22",
        "[X12,X22] = -X12",
        "[X21,X22] = X21",
    ]
    assert res.algebra.check_jacobi()


def test_riccati_closure_is_three_dimensional():
    res = closure([vf(("x",), "1"), vf(("x",), "x^2")])
    assert res.closed and res.algebra.dim == 3


def test_cubic_generators_hit_degree_bound():
    res = closure([vf(("x",), "x^2"), vf(("x",), "x^3")])
    assert not res.closed and res.reason == "degree"


def test_dimension_bound():
    res = closure([vf(("x",), "x^2"), vf(("x",), "x^3")], Bounds(max_dim=3, max_depth=10, max_degree=50))
    assert not res.closed and res.reason == "dimension"


def test_span_membership_and_independence():
    assert span_membership(GL2[0] * 2 - GL2[3], GL2) == (2, 0, 0, -1)
    assert span_membership(vf(XY, "x^2", "0"), GL2) is None
    assert not is_independent([GL2[0], GL2[1], GL2[0] * Fraction(3)])


def test_rational_coefficient_span():
    a = vf(XY, "1/(1+x^2)", "0")
    assert span_membership(a * 5, [a]) == (5,)


def test_structure_constants_and_same_span():
    alt = [GL2[0] + GL2[3], GL2[1], GL2[2], GL2[0] - GL2[3]]
    assert same_span(alt, GL2)
    alg = structure_constants(GL2)
    assert alg.c(1, 2, 0) == -1 and alg.c(1, 2, 3) == 1
    js = alg.to_json()
    assert js["dim"] == 4 and js["closed"]
