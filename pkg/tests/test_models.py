import json

import pytest

from stochlie import models
from stochlie.errors import ParseError
from stochlie.modelfile import dump_model, load_model_text, operator_from_dict
from stochlie.polyalg import parse_rational
from stochlie.stratonovich import STRAT, classify_foliated, classify_stochastic_lie, convert
from stochlie.vecfield import VectorField


def test_catalog_size_and_metadata():
    ids = models.ids()
    assert len(ids) >= 9
    for i in ids:
        e = models.get(i)
        assert e.id == i and e.title and e.provenance
        assert e.operator.dim == len(e.chart)
        json.dumps(e.summary())


@pytest.mark.parametrize("entry_id", models.ids())
def test_export_roundtrip(entry_id):
    e = models.get(entry_id)
    data = models.export(entry_id)
    assert operator_from_dict(json.loads(json.dumps(data))).equivalent(e.operator)
    again = operator_from_dict(dump_model(e.operator, e.params))
    assert again.equivalent(e.operator)


@pytest.mark.parametrize("entry_id", models.ids())
def test_expected_classification(entry_id):
    e = models.get(entry_id)
    exp = e.expected
    if not exp:
        pytest.skip("no recorded expectation")
    verdict = exp.get("verdict") or exp.get("converted_verdict")
    if verdict is None:
        pytest.skip("no verdict recorded")
    res = classify_stochastic_lie(convert(e.operator, STRAT), basis_hint=e.hint_fields(), labels=e.labels)
    assert res.verdict == verdict
    if "dim" in exp:
        assert res.dim == exp["dim"]


def test_overrides():
    e = models.get("oscillator-white-noise", {"sigma": "1/4", "ω": 2})
    assert str(e.params["sigma"]) == "1/4" and str(e.params["omega"]) == "2"
    with pytest.raises(ValueError):
        models.get("gbm", {"nope": 1})
    with pytest.raises(ValueError):
        models.get("gbm", {"a": 0.5})
    with pytest.raises(KeyError):
        models.get("no-such-model")


def test_sis_ito_100_drift():
    e = models.get("sis-ito-100")
    assert e.operator.drift.component(0) == parse_rational("5*I - I^2/2", ("I", "t"))


def test_satellite_stratonovich_drift():
    p = {"A": "3/2", "B": "2", "C": "5", "D": "1/3"}
    strat = convert(models.get("satellite", p).operator, STRAT)
    v = ("Y", "dY", "t")
    expect = parse_rational(f"(2*C - D - A^2*D*B/2)*Y - (B + A^2*B^2/2)*dY", v, {k: p[k] for k in "ABCD"})
    assert strat.drift.component(0) == parse_rational("dY", v)
    assert strat.drift.component(1) == expect


def test_oscillator_rn_builder():
    assert models.oscillator_rn_model(3)["vars"] == ["x1", "y1", "x2", "y2", "x3", "y3"]
    with pytest.raises(ValueError):
        models.oscillator_rn_model(0)


def test_foliated_attachment():
    e = models.get("jacobi-sis")
    op = e.operator
    fields = [VectorField(op.chart, [e.parse(c) for c in cs]) for cs in e.foliated["fields"]]
    coeffs = [[e.parse(c, op.chart + ("t",)) for c in row] for row in e.foliated["coefficients"]]
    assert classify_foliated(op, fields, coeffs)
    assert models.get("jacobi-sis").no_symplectic


MINIMAL = {
    "vars": ["x"],
    "interpretation": "stratonovich",
    "drift": [{"t_poly": "1", "field": {"coeffs": ["a*x"]}}],
    "noises": [[{"t_poly": "t", "field": {"coeffs": ["x"]}}]],
    "params": {"a": "1/2"},
}


def test_modelfile_minimal():
    op, _ = load_model_text(json.dumps(MINIMAL))
    assert len(op.noises) == 1 and op.interpretation == STRAT
    op2, _ = load_model_text(json.dumps(MINIMAL), {"a": "3"})
    assert op2.drift.component(0) == parse_rational("3*x", ("x", "t"))


@pytest.mark.parametrize(
    "text,needle",
    [
        ("", "empty"),
        ("   \n", "empty"),
        ('{"vars": ["x"],\n "drift": [}', "line 2"),
        (json.dumps({**MINIMAL, "params": {"x": "1"}}), "collide"),
        (json.dumps({**MINIMAL, "drift": [{"field": {"coeffs": ["x +* 2"]}}]}), "drift[0].field.coeffs[0]"),
        (json.dumps({**MINIMAL, "drift": [{"field": {"coeffs": ["x", "y"]}}]}), "coefficient"),
        (json.dumps({k: v for k, v in MINIMAL.items() if k != "interpretation"}), "interpretation"),
        ("[1, 2]", "JSON object"),
    ],
)
def test_modelfile_errors(text, needle):
    with pytest.raises(ParseError) as exc:
        load_model_text(text)
    assert needle in str(exc.value)


def test_modelfile_float_param_rejected():
    with pytest.raises(ValueError, match="fraction"):
        load_model_text(json.dumps({**MINIMAL, "params": {"a": 0.5}}))


def test_modelfile_decimal_string_exact():
    op, _ = load_model_text(json.dumps({**MINIMAL, "params": {"a": "0.1"}}))
    assert op.drift.component(0) == parse_rational("x/10", ("x", "t"))


def test_bad_interpretation():
    with pytest.raises(Exception):
        load_model_text(json.dumps({**MINIMAL, "interpretation": "maybe"}))
