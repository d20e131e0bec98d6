import numpy as np
import pytest

from stochlie import models
from stochlie.hamiltonian import SymplecticForm
from stochlie.polyalg import parse_rational
from stochlie.sde_sim import integrate, sample_ensemble
from stochlie.stability import (
    MomentumMapSpec,
    check_equilibrium,
    dirichlet_check,
    find_equilibria,
    relative_equilibrium_solve,
    symmetry_check,
)
from stochlie.stratonovich import STRAT, StochOperator, TimeField, convert
from stochlie.vecfield import VectorField

XY = ("x", "y")
ROTATION = models.get("oscillator-white-noise", {"k": 0, "sigma": 0}).operator


def test_damped_oscillator_equilibrium():
    res = find_equilibria(models.get("oscillator-white-noise").operator, [(1, 2), (-3, 0.5), (0.2, 0.1)])
    assert len(res.equilibria) == 1
    assert np.allclose([float(v) for v in res.equilibria[0].point], [0, 0], atol=1e-10)


def test_lotka_volterra_interior_point_rejected():
    lv = models.get("lotka-volterra")
    rep = check_equilibrium(lv.operator, (1, 1))
    assert rep.residuals["drift"] == 0  # deterministic fixed point
    assert not rep.is_equilibrium and rep.witness == "noise1"
    found = find_equilibria(lv.operator, [(0.3, 0.2), (1.1, 0.9), (2.0, 3.0)])
    assert all(np.allclose([float(v) for v in e.point], 0, atol=1e-9) for e in found.equilibria)


def test_general_lotka_volterra_interior_point_rejected():
    op = convert(models.get("lotka-volterra-general").operator, STRAT)
    assert not check_equilibrium(op, (2, 1)).is_equilibrium


def test_zero_operator_degenerate():
    zero = StochOperator(XY, STRAT, TimeField.zero(XY), ())
    res = find_equilibria(zero, [(1, 2), (3, 4)])
    assert res.degenerate and len(res.equilibria) == 2


def test_time_dependent_fields_must_vanish_separately():
    chart = ("x",)
    from stochlie.polyalg import parse_polynomial

    drift = TimeField(chart, [(parse_polynomial("1", ("t",)), VectorField.parse(chart, ["x"])), (parse_polynomial("t", ("t",)), VectorField.parse(chart, ["x - 1"]))])
    op = StochOperator(chart, STRAT, drift, ())
    assert not check_equilibrium(op, (0,)).is_equilibrium
    assert not check_equilibrium(op, (1,)).is_equilibrium


def test_singular_start_abandoned():
    chart = ("x",)
    op = StochOperator(chart, STRAT, TimeField.single(VectorField.parse(chart, ["x^2 - 1"])), ())
    res = find_equilibria(op, [(0.0,), (2.0,), (-3.0,)])
    assert len(res.abandoned) == 1
    assert sorted(round(float(e.point[0]), 8) for e in res.equilibria) == [-1.0, 1.0]


def test_dirichlet_pure_rotation():
    v = dirichlet_check(ROTATION, parse_rational("(x^2+y^2)/2", XY), (0, 0))
    assert v.stable
    js = v.to_json()
    assert js["strongly_conserved"] and js["critical"] and js["definite"]


def test_dirichlet_translation_noise_not_conserved():
    e = models.get("oscillator-rn")
    f = parse_rational("(x1^2+y1^2+x2^2+y2^2)/2", e.chart)
    v = dirichlet_check(e.operator, f, (0, 0, 0, 0))
    assert v.conserved == "no" and not v.stable


def test_dirichlet_constant_function():
    v = dirichlet_check(ROTATION, parse_rational("1", XY), (0, 0))
    assert v.critical and v.hessian == "degenerate" and not v.stable


def test_dirichlet_indefinite_and_negative():
    assert dirichlet_check(ROTATION, parse_rational("x^2 - y^2", XY), (0, 0)).hessian == "indefinite"
    v = dirichlet_check(ROTATION, parse_rational("-(x^2+y^2)", XY), (0, 0))
    assert v.hessian == "negative-definite" and v.stable


def test_dirichlet_non_equilibrium_reports():
    v = dirichlet_check(ROTATION, parse_rational("(x^2+y^2)/2", XY), (1, 0))
    assert not v.equilibrium and v.conclusion == "not an equilibrium"


def test_stable_paths_stay_close():
    rng = np.random.default_rng(0)
    ang = rng.uniform(0, 2 * np.pi, 100)
    rad = 0.1 * np.sqrt(rng.uniform(0, 1, 100))
    x0 = np.vstack([rad * np.cos(ang), rad * np.sin(ang)])
    traj = integrate(ROTATION, x0, sample_ensemble(0, 5.0, 5000, 1, 100))
    assert np.max(np.linalg.norm(traj.states, axis=1)) < 0.5


def test_symmetries():
    rot = models.get("rotation").operator
    c, s = 3, 4  # rational rotation by a Pythagorean angle, scaled
    assert symmetry_check([[c, -s], [s, c]], rot)[0]
    assert symmetry_check([[1, 0], [0, 1]], models.get("sis-hamiltonian").operator)[0]
    ok, witness = symmetry_check([[1, 0], [0, 2]], rot)
    assert not ok and witness["field"] == "drift"
    for k in (-2, 3, "1/5"):
        assert symmetry_check([[k]], models.get("gbm").operator)[0]
    with pytest.raises(ValueError):
        symmetry_check([[0, 0], [0, 0]], rot)


def _so2():
    om = SymplecticForm.canonical(XY)
    return MomentumMapSpec(om, [VectorField.parse(XY, ["y", "-x"])], [parse_rational("(x^2+y^2)/2", XY)])


def test_momentum_map_verified():
    assert _so2().verified
    with pytest.raises(ValueError):
        MomentumMapSpec(SymplecticForm.canonical(XY), [VectorField.parse(XY, ["-y", "x"])], [parse_rational("(x^2+y^2)/2", XY)])


def test_relative_equilibrium_single():
    mm = _so2()
    res = relative_equilibrium_solve([parse_rational("(x^2+y^2)/2", XY)], mm, [1, 0], [[0.5]])
    assert res.converged
    assert res.xi[0][0] == pytest.approx(1.0, abs=1e-8)
    assert res.residual < 1e-8
    assert res.mu[0] == pytest.approx(0.5 * (res.point[0] ** 2 + res.point[1] ** 2))


def test_relative_equilibrium_two_components():
    mm = _so2()
    h = parse_rational("(x^2+y^2)/2", XY)
    res = relative_equilibrium_solve([h, h], mm, [1, 0], [[0.5], [0.5]])
    assert res.converged and np.allclose(res.xi, [[1.0], [1.0]], atol=1e-8)


def test_relative_equilibrium_failure_reported():
    mm = _so2()
    res = relative_equilibrium_solve([parse_rational("y/x", XY)], mm, [1, 0.2], [[0.5]], max_iter=20)
    assert not res.converged
