import pytest

from stochlie import models
from stochlie.errors import ChartMismatchError
from stochlie.polyalg import parse_rational
from stochlie.prolong import (
    ImplicitRule,
    SuperpositionRule,
    builtin_rule,
    copy_name,
    diagonal_prolong,
    explicit_rule,
    first_integrals_poly,
    generic_rank,
    jacobian_condition,
    minimal_m,
    prolong_operator,
    prolonged_chart,
    verify_first_integral,
    verify_superposition,
)
from stochlie.vecfield import VectorField

XY = ("x", "y")
ROT = VectorField.parse(XY, ["y", "-x"])


def test_naming():
    assert copy_name("x", 2) == "x_2"
    assert prolonged_chart(XY, 2) == ("x_1", "y_1", "x_2", "y_2")
    assert prolonged_chart(XY, 2, 0) == ("x_0", "y_0", "x_1", "y_1")


def test_prolongation_is_a_lie_morphism():
    A, B = VectorField.parse(XY, ["x", "0"]), VectorField.parse(XY, ["y", "x^2"])
    lhs = diagonal_prolong(A.bracket(B), 3)
    rhs = diagonal_prolong(A, 3).bracket(diagonal_prolong(B, 3))
    assert lhs == rhs


def test_k1_is_identity():
    assert diagonal_prolong(ROT, 1) is ROT


@pytest.mark.parametrize("s", [3, 4, 5])
def test_vandermonde_rank(s):
    fields = [VectorField.parse(("x",), [f"x^{j}"]) for j in range(s)]
    assert generic_rank([diagonal_prolong(X, s) for X in fields]) == s
    assert generic_rank([diagonal_prolong(X, s - 1) for X in fields]) == s - 1


def test_minimal_m():
    gl2 = models.get("oscillator-white-noise").hint_fields()
    assert minimal_m(gl2) == 2
    assert minimal_m([ROT]) == 1


def test_rotation_first_integrals():
    found = first_integrals_poly([diagonal_prolong(ROT, 2)], 2)
    strs = {str(p) for p in found}
    assert {"x_1^2 + y_1^2", "x_1*x_2 + y_1*y_2", "x_2^2 + y_2^2"} <= strs
    for F in found:
        assert verify_first_integral([diagonal_prolong(ROT, 2)], F)


def test_explicit_rule_from_integrals():
    vs = prolonged_chart(XY, 2, 0)
    ints = [parse_rational("x_0*x_1 + y_0*y_1", vs), parse_rational("x_0*y_1 - y_0*x_1", vs)]
    assert jacobian_condition(ints, XY)
    assert not jacobian_condition([ints[0], ints[0]], XY)
    rule = explicit_rule(ints, XY, 1)
    assert rule.is_linear_in_constants()
    rot = models.get("rotation").operator
    rep = verify_superposition(rule, rot, trials=5, N=2000, seed=1)
    assert rep.passed


def test_builtin_rules():
    r = builtin_rule("linear2", XY)
    assert r.m == 2 and r.constants == ("k1", "k2") and r.is_linear_in_constants()
    assert builtin_rule("affine3", XY).m == 3
    assert not builtin_rule("wrong-product", XY).is_linear_in_constants()
    with pytest.raises(ValueError):
        builtin_rule("quadratic", XY)


def test_implicit_rule_jacobian():
    rule = ImplicitRule.parse(XY, 1, ["x_0*x_1 + y_0*y_1", "x_0*y_1 - y_0*x_1"])
    assert rule.jacobian_ok()
    assert rule.to_json()["kind"] == "implicit"


def test_prolong_operator_chart():
    op = prolong_operator(models.get("gbm").operator, 3)
    assert op.chart == ("X_1", "X_2", "X_3") and len(op.noises) == 1


def test_rule_chart_mismatch():
    with pytest.raises(ChartMismatchError):
        verify_superposition(builtin_rule("linear1", ("z",)), models.get("rotation").operator, trials=1, N=10)


def test_oscillator_superposition():
    e = models.get("oscillator-white-noise")
    good = verify_superposition(builtin_rule("linear2", e.chart), e.operator, trials=20, N=10_000)
    assert good.passed and good.max_residual < 1e-3
    bad = verify_superposition(builtin_rule("wrong-product", e.chart), e.operator, trials=20, N=10_000)
    assert not bad.passed and bad.max_residual > 1e-1


def test_superposition_report_json():
    e = models.get("oscillator-white-noise")
    rep = verify_superposition(SuperpositionRule.parse(e.chart, 2, ("k1", "k2"), ["k1*x_1 + k2*x_2", "k1*y_1 + k2*y_2"]), e.operator, trials=2, N=500)
    js = rep.to_json()
    assert js["trials"] == 2 and len(js["trial_residuals"]) == 2 and js["N"] == 500
