import io

import numpy as np
import pytest

from stochlie import models
from stochlie.errors import InterpretationError, PoleError
from stochlie.polyalg import parse_polynomial
from stochlie.sde_sim import (
    POLE_THRESHOLD,
    BrownianPath,
    compile_functions,
    cross_scheme_slope,
    derive_seed,
    gbm_exact,
    integrate,
    integrate_em,
    integrate_heun,
    sample_brownian,
    sample_ensemble,
    strong_order_estimate,
    write_csv,
    write_ensemble_csv,
)
from stochlie.polyalg import parse_rational
from stochlie.stratonovich import STRAT, StochOperator, TimeField, convert
from stochlie.vecfield import VectorField

STEPS = [2.0**-k for k in range(6, 11)]


def test_paths_reproducible_and_independent():
    a = sample_brownian(7, 1.0, 64, 2)
    b = sample_brownian(7, 1.0, 64, 2)
    assert np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.increments[0], a.increments[1])
    assert not np.array_equal(a.increments, sample_brownian(8, 1.0, 64, 2).increments)


def test_path_statistics():
    p = sample_brownian(0, 2.0, 100_000, 1)
    inc = p.increments[0]
    assert abs(inc.mean()) < 4 * np.sqrt(p.dt / inc.size)
    assert inc.var() == pytest.approx(p.dt, rel=0.02)


def test_ensemble_members_match_single_paths():
    e = sample_ensemble(3, 1.0, 16, 1, 5)
    for i in range(5):
        assert np.array_equal(e.increments[:, :, i], sample_brownian(derive_seed(3, i), 1.0, 16, 1).increments)


def test_coarsen_preserves_terminal():
    p = sample_brownian(1, 1.0, 64, 1)
    c = p.coarsen(8)
    assert c.N == 8
    assert np.allclose(c.terminal(), p.terminal())
    with pytest.raises(ValueError):
        p.coarsen(5)


def test_bad_grid():
    with pytest.raises(ValueError):
        sample_brownian(0, -1.0, 10, 1)
    with pytest.raises(ValueError):
        sample_brownian(0, 1.0, 0, 1)


def test_compiled_functions():
    f = compile_functions(("x", "y"), [parse_rational("x^2*y - 1/2", ("x", "y")), parse_rational("1/(1+x^2)", ("x", "y"))])
    out = f(np.array([1.0, 2.0]), np.array([3.0, 0.0]))
    assert np.allclose(out[0], [2.5, -0.5]) and np.allclose(out[1], [0.5, 0.2])


def test_scheme_interpretation_guard():
    g = models.get("gbm").operator
    path = sample_brownian(0, 1.0, 10, 1)
    with pytest.raises(InterpretationError):
        integrate_heun(g, [1.0], path)
    with pytest.raises(InterpretationError):
        integrate_em(convert(g, STRAT), [1.0], path)


def test_deterministic_rotation_accuracy():
    rot = models.get("oscillator-white-noise", {"k": 0, "sigma": 0}).operator
    traj = integrate(rot, [1.0, 0.0], sample_brownian(0, np.pi / 2, 2000, 1))
    assert np.allclose(traj.terminal, [0.0, -1.0], atol=1e-5)


def test_pole_guard():
    chart = ("x",)
    o = StochOperator(chart, STRAT, TimeField.single(VectorField.parse(chart, ["-1/x"])), ())
    with pytest.raises(PoleError):
        integrate(o, [0.0], None, T=1.0, N=10)
    assert POLE_THRESHOLD == 1e-12


def test_gbm_strong_order():
    g = models.get("gbm").operator
    est = strong_order_estimate(g, gbm_exact(1, 0.5), [1.0], STEPS, paths=200, seed=0)
    assert abs(est.slope - 0.5) <= 0.15


def test_cross_scheme_consistency():
    g = models.get("gbm").operator
    est = cross_scheme_slope(g, convert(g, STRAT), [1.0], STEPS, paths=200, seed=0)
    assert est.slope > 0.4


def test_csv_deterministic():
    g = models.get("gbm").operator
    outs = []
    for _ in range(2):
        traj = integrate(g, [1.0], sample_ensemble(5, 1.0, 20, 1, 3))
        buf = io.StringIO()
        write_csv(traj, buf, member=1)
        buf2 = io.StringIO()
        write_ensemble_csv(traj, buf2)
        outs.append(buf.getvalue() + buf2.getvalue())
    assert outs[0] == outs[1]
    head = outs[0].splitlines()[0]
    assert head == "t,X"
    assert "path,t,X" in outs[0]


def test_time_weights_used():
    chart = ("x",)
    o = StochOperator(chart, STRAT, TimeField(chart, [(parse_polynomial("t", ("t",)), VectorField.parse(chart, ["1"]))]), ())
    traj = integrate(o, [0.0], None, T=1.0, N=100)
    assert traj.terminal[0] == pytest.approx(0.5, abs=1e-12)


def test_gbm_ensemble_mean():
    g = models.get("gbm").operator
    traj = integrate(g, [1.0], sample_ensemble(11, 1.0, 200, 1, 500))
    xt = traj.terminal[0]
    assert abs(xt.mean() - np.e) < 3 * xt.std(ddof=1) / np.sqrt(xt.size)


def test_brownian_path_is_value_object():
    p = BrownianPath(0, 1.0, 2, np.zeros((1, 2)))
    assert p.dims == 1 and p.dt == 0.5 and p.batch == ()
