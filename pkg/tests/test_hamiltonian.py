from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochlie import models
from stochlie.hamiltonian import (
    CasimirElement,
    HamiltonianFunction,
    NotHamiltonian,
    SymplecticForm,
    casimir_verify,
    coalgebra_constant,
    conserved_search,
    hamiltonian_of,
    is_hamiltonian_system,
    lie_hamilton_algebra,
    oscillator_casimir,
    poisson_bracket,
    sl2_casimir,
)
from stochlie.modelfile import operator_from_dict
from stochlie.models import oscillator_rn_model
from stochlie.polyalg import Polynomial, parse_rational
from stochlie.vecfield import VectorField

QP = ("q", "p")
XY = ("x", "y")
OM = SymplecticForm.canonical(QP)


def rf(text, chart=QP):
    return parse_rational(text, chart)


def test_form_validation():
    with pytest.raises(ValueError):
        SymplecticForm(XY, [["0", "1"], ["1", "0"]])  # not antisymmetric
    with pytest.raises(ValueError):
        SymplecticForm(XY, [["0", "0"], ["0", "0"]])  # degenerate
    with pytest.raises(ValueError):
        SymplecticForm(("a", "b", "c", "d"), [["0", "c", "0", "0"], ["-c", "0", "0", "0"], ["0", "0", "0", "1"], ["0", "0", "-1", "0"]])


def test_sign_convention():
    assert OM.hamiltonian_field(rf("p")) == VectorField.parse(QP, ["1", "0"])
    assert poisson_bracket(rf("q"), rf("p"), OM) == rf("1")


def test_sis_hamiltonians():
    Y1 = VectorField.parse(QP, ["q", "-p"])
    Y2 = VectorField.parse(QP, ["-(q^2+1/p^2)", "2*q*p"])
    h1, h2 = hamiltonian_of(Y1, OM), hamiltonian_of(Y2, OM)
    assert h1 == rf("q*p")
    assert h2 == rf("-q^2*p + 1/p")
    # dh = i_Y omega, exactly
    assert h2.gradient() == OM.contract(Y2)
    assert OM.hamiltonian_field(h2) == Y2
    assert poisson_bracket(h1, h2, OM) == -h2.rational


def test_not_hamiltonian():
    res = hamiltonian_of(VectorField.parse(XY, ["x", "0"]), SymplecticForm.canonical(XY))
    assert isinstance(res, NotHamiltonian) and not res
    assert res.to_json()["reason"] == "not closed"


def test_damped_oscillator_not_hamiltonian():
    e = models.get("oscillator-white-noise")
    res = is_hamiltonian_system(e.operator, SymplecticForm.canonical(XY), basis_hint=e.hint_fields())
    assert isinstance(res, NotHamiltonian)


def test_lotka_volterra_log_hamiltonians():
    e = models.get("lotka-volterra")
    lha = is_hamiltonian_system(e.operator, e.omega(), basis_hint=e.hint_fields())
    h1, h2 = lha.hamiltonians
    assert not h1.is_rational() and h2.is_rational()
    for h, X in zip(lha.hamiltonians, lha.fields):
        assert e.omega().hamiltonian_field(h) == X
    assert h1.evaluate({"N1": 2.0, "N2": 2.0}) == pytest.approx(0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_oscillator_heisenberg_extension(n):
    op = operator_from_dict(oscillator_rn_model(n))
    chart = op.chart
    X1 = VectorField.parse(chart, [f"y{v[1:]}" if v[0] == "x" else f"-x{v[1:]}" for v in chart])
    X2 = VectorField.parse(chart, ["1" if v[0] == "x" else "0" for v in chart])
    X3 = VectorField.parse(chart, ["0" if v[0] == "x" else "1" for v in chart])
    om = SymplecticForm.canonical(chart)
    lha = is_hamiltonian_system(op, om, basis_hint=[X1, X2, X3])
    h1, h2, h3 = lha.hamiltonians
    assert h1 == parse_rational(" + ".join(f"({v}^2)/2" for v in chart), chart)
    assert h2 == parse_rational(" + ".join(f"y{i}" for i in range(1, n + 1)), chart)
    assert h3 == parse_rational(" - ".join(["0"] + [f"x{i}" for i in range(1, n + 1)]), chart)
    assert poisson_bracket(h2, h3, om) == parse_rational(str(n), chart)
    assert lha.central and lha.dim == 4
    assert lha.to_json()["brackets"] == ["{h1,h2} = -h3", "{h1,h3} = h2", f"{{h2,h3}} = {n}"]
    ok, _ = casimir_verify(lha.structure, oscillator_casimir(n))
    assert ok
    assert not casimir_verify(lha.structure, CasimirElement.parse(f"v2^2 + v3^2 + {2 * n}*v1*v4", 4))[0]


def test_central_extension_only_when_needed():
    # translations and a shear: {p, -q} = 1 cannot be absorbed
    fields = [VectorField.parse(QP, ["1", "0"]), VectorField.parse(QP, ["0", "-q"]), VectorField.parse(QP, ["0", "1"])]
    lha = lie_hamilton_algebra(fields, OM)
    assert lha.central and lha.dim == 4
    # translation and dilation close without constants
    lha = lie_hamilton_algebra([VectorField.parse(QP, ["1", "0"]), VectorField.parse(QP, ["q", "-p"])], OM)
    assert not lha.central and lha.to_json()["brackets"] == ["{h1,h2} = -h1"]


def test_conserved_search():
    om = SymplecticForm.canonical(XY)
    assert [str(p) for p in conserved_search([rf("(x^2+y^2)/2", XY)], om, 2).basis] == ["x^2 + y^2"]
    assert conserved_search([rf("x", XY), rf("y", XY)], om, 3).basis == ()
    assert conserved_search([], om, 1).degenerate


SL2 = {(0, 1): (Fraction(1), 0, 0), (0, 2): (0, Fraction(2), 0), (1, 2): (0, 0, Fraction(1))}


def test_casimir_oracles():
    assert casimir_verify(SL2, sl2_casimir())[0]
    ok, witness = casimir_verify(SL2, CasimirElement.parse("v1*v3", 3))
    # {v1, v1*v3} = 2*v1*v2 while {v2, v1*v3} vanishes
    assert not ok and witness[0] == 0 and str(witness[1]) == "2*v1*v2"
    assert casimir_verify({}, CasimirElement.parse("v1^3*v2 + 7", 2))[0]


def test_sl2_coalgebra_constant():
    e = models.get("sl2-symplectic")
    lha = is_hamiltonian_system(e.operator, e.omega(), basis_hint=e.hint_fields())
    assert [str(h) for h in lha.hamiltonians] == ["1/2*p^2", "-1/2*q*p", "1/2*q^2"]
    cc = coalgebra_constant(sl2_casimir(), lha, 2)
    assert cc.verified
    assert cc.function == parse_rational("(q_1*p_2 - p_1*q_2)^2/4", ("q_1", "p_1", "q_2", "p_2"))


def test_linear_casimir_of_central_element():
    e = models.get("oscillator-rn")
    lha = is_hamiltonian_system(e.operator, e.omega(), basis_hint=e.hint_fields())
    cc = coalgebra_constant(CasimirElement.parse("v4", 4), lha, 3)
    assert cc.verified and cc.function == 3


def test_hamiltonian_function_arithmetic():
    h = HamiltonianFunction.of("q*p + 3", QP)
    assert h.normalized() == HamiltonianFunction.of("q*p", QP)
    assert (h * 2 - h) == h
    assert str(HamiltonianFunction.of("q", QP)) == "q"


coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)
quad = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), coef, max_size=3).map(
    lambda d: Polynomial(QP, {k: v for k, v in d.items() if sum(k) <= 2})
)


@given(quad, quad, quad)
@settings(max_examples=40, deadline=None)
def test_poisson_jacobi_and_antisymmetry(f, g, h):
    def pb(a, b):
        return poisson_bracket(a, b, OM)

    assert pb(f, g) == -pb(g, f)
    total = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
    assert total.is_zero()


@given(quad)
@settings(max_examples=30, deadline=None)
def test_hamiltonian_roundtrip(f):
    X = OM.hamiltonian_field(f)
    h = hamiltonian_of(X, OM)
    assert OM.hamiltonian_field(h) == X
