"""JSON model files.

Grammar::

    {
      "vars": ["x", "y"],
      "interpretation": "ito" | "stratonovich",
      "drift":  [{"t_poly": "1", "field": {"coeffs": ["y", "-x"]}}, ...],
      "noises": [[{"t_poly": "sigma", "field": {"coeffs": ["0", "y"]}}], ...],
      "params": {"sigma": "1/2", ...}
    }

Parameters are substituted as exact rationals before anything else happens.
Greek spellings (``σ``) and ASCII names (``sigma``) are interchangeable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .errors import ParseError
from .polyalg import TIME, as_fraction, parse_polynomial, parse_rational
from .stratonovich import StochOperator, TimeField
from .vecfield import VectorField, make_chart

__all__ = ["ALIASES", "normalize_params", "param_table", "operator_from_dict", "load_model_text", "load_model_file", "dump_model"]

ALIASES = {
    "σ": "sigma",
    "ω": "omega",
    "β": "beta",
    "γ": "gamma",
    "μ": "mu",
    "ρ": "rho",
    "σ₀": "sigma0",
    "σ₁": "sigma1",
    "σ0": "sigma0",
    "σ1": "sigma1",
}


def _canonical_name(name: str) -> str:
    name = name.strip()
    return ALIASES.get(name, name)


def normalize_params(params: Mapping | None) -> dict:
    """ASCII-keyed exact parameters; rejects floats and unparseable values."""
    out = {}
    for k, v in (params or {}).items():
        if isinstance(v, float):
            raise ValueError(f"parameter {k!r}: floats are not exact; write {v!r} as a fraction string")
        try:
            out[_canonical_name(k)] = as_fraction(v)
        except (TypeError, ValueError):
            raise ValueError(f"parameter {k!r}: {v!r} is not an exact rational") from None
    return out


def param_table(params: Mapping) -> dict:
    """Constants usable inside expressions, under both ASCII and Greek names."""
    table = dict(params)
    for greek, ascii_name in ALIASES.items():
        if ascii_name in params and greek not in table:
            table[greek] = params[ascii_name]
    return table


def _parse_expr(text, variables, constants, where, polynomial=False):
    if not isinstance(text, (str, int)):
        raise ParseError(f"{where}: expected an expression string, got {type(text).__name__}")
    try:
        if polynomial:
            return parse_polynomial(str(text), variables, constants)
        return parse_rational(str(text), variables, constants)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc.message}", exc.text, exc.column) from None


def _component(items, chart, constants, where) -> TimeField:
    if not isinstance(items, list):
        raise ParseError(f"{where}: expected a list of {{t_poly, field}} terms")
    terms = []
    for k, item in enumerate(items):
        loc = f"{where}[{k}]"
        if not isinstance(item, Mapping) or "field" not in item:
            raise ParseError(f"{loc}: each term needs a 'field'")
        w = _parse_expr(item.get("t_poly", "1"), (TIME,), constants, f"{loc}.t_poly", polynomial=True)
        fld = item["field"]
        coeffs = fld.get("coeffs") if isinstance(fld, Mapping) else fld
        if isinstance(fld, Mapping) and "chart" in fld and tuple(fld["chart"]) != chart:
            raise ParseError(f"{loc}.field: chart {fld['chart']} differs from vars {list(chart)}")
        if not isinstance(coeffs, list) or len(coeffs) != len(chart):
            raise ParseError(f"{loc}.field: need {len(chart)} coefficient strings")
        parsed = [
            _parse_expr(c, chart, constants, f"{loc}.field.coeffs[{i}]") for i, c in enumerate(coeffs)
        ]
        terms.append((w, VectorField(chart, parsed)))
    return TimeField(chart, terms)


def operator_from_dict(data: Mapping, overrides: Mapping | None = None) -> StochOperator:
    """Build a StochOperator; ``overrides`` replace entries of ``params``."""
    if not isinstance(data, Mapping):
        raise ParseError("model must be a JSON object")
    for key in ("vars", "interpretation", "drift"):
        if key not in data:
            raise ParseError(f"model is missing {key!r}")
    chart = make_chart(data["vars"])
    params = normalize_params(data.get("params"))
    if overrides:
        unknown = [k for k in normalize_params(overrides) if k not in params]
        if unknown:
            raise ValueError(f"unknown parameter(s) {unknown}; model has {sorted(params)}")
        params.update(normalize_params(overrides))
    constants = param_table(params)
    clash = [v for v in chart if v in constants]
    if clash:
        raise ParseError(f"parameter names {clash} collide with state variables")
    drift = _component(data["drift"], chart, constants, "drift")
    noises = data.get("noises", [])
    if not isinstance(noises, list):
        raise ParseError("'noises' must be a list of components")
    noise_fields = [_component(n, chart, constants, f"noises[{b}]") for b, n in enumerate(noises)]
    return StochOperator(chart, data["interpretation"], drift, tuple(noise_fields), name=str(data.get("name", "")))


def load_model_text(text: str, overrides: Mapping | None = None):
    if not text.strip():
        raise ParseError("empty model file", text, 1, 1)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, text, exc.colno, exc.lineno) from None
    return operator_from_dict(data, overrides), data


def load_model_file(path, overrides: Mapping | None = None):
    return load_model_text(Path(path).read_text(encoding="utf-8"), overrides)


def dump_model(op: StochOperator, params: Mapping | None = None) -> dict:
    data = op.to_dict()
    if op.name:
        data["name"] = op.name
    data["params"] = {k: str(v) for k, v in sorted((params or {}).items())}
    return data
