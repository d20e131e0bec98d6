"""Stochastic operators, Itô/Stratonovich conversion and Lie classification.

An operator carries a drift and l-1 noise components.  Each component is a
:class:`TimeField`, a finite sum ``sum_k w_k(t) W_k`` of polynomial time
weights times time-independent vector fields.

Conversion (coefficients exact, ``t`` kept symbolic)::

    strat drift^i = ito drift^i - 1/2 sum_b sum_j (d S_b^i / d x_j) S_b^j

Noise components are never touched by a conversion.

Typo note: for the SIS model with noise sigma(t) I (100 - I) the cubic
drift term of the Stratonovich form is ``-sigma(t)^2 I^3``.  Likewise the
general SIS Itô form recovered from the Stratonovich one carries
``sigma(t)^2 N^2 / 2``.  Both are the values this module produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ChartMismatchError, DecompositionMismatch, InterpretationError
from .liealg import Bounds, ClosureResult, LieAlgebraBasis, closure, same_span, span_membership, structure_constants
from .polyalg import TIME, Polynomial, RationalFunction, as_fraction
from .vecfield import VectorField, make_chart

__all__ = [
    "TimePoly",
    "time_poly",
    "TimeField",
    "StochOperator",
    "LieClassification",
    "ito_to_strat",
    "strat_to_ito",
    "convert",
    "classify_stochastic_lie",
    "classify_foliated",
    "correction_field",
]

ITO = "ito"
STRAT = "stratonovich"


def time_poly(value) -> Polynomial:
    """A univariate polynomial in ``t`` from a scalar, string or polynomial."""
    if isinstance(value, Polynomial):
        extra = [v for v in value.used_variables() if v != TIME]
        if extra:
            raise ValueError(f"time weight depends on {extra}; only {TIME!r} is allowed")
        return value.embed((TIME,))
    if isinstance(value, str):
        from .polyalg import parse_polynomial

        return parse_polynomial(value, (TIME,))
    return Polynomial.constant(value, (TIME,))


TimePoly = Polynomial


class TimeField:
    """sum_k w_k(t) W_k with polynomial weights w_k and t-free fields W_k."""

    __slots__ = ("chart", "terms", "_by_power")

    def __init__(self, chart: Sequence[str], terms: Sequence = ()):
        chart = make_chart(chart)
        clean = []
        for w, f in terms:
            w = time_poly(w)
            if not isinstance(f, VectorField):
                raise TypeError("TimeField terms are (weight, VectorField) pairs")
            if f.chart != chart:
                raise ChartMismatchError(f"field chart {f.chart} differs from {chart}")
            clean.append((w, f))
        self.chart = chart
        self.terms = tuple(clean)
        self._by_power = None

    @classmethod
    def single(cls, f: VectorField, weight=1) -> "TimeField":
        return cls(f.chart, [(weight, f)])

    @classmethod
    def from_powers(cls, chart, powers: dict) -> "TimeField":
        t = Polynomial.variable(TIME)
        return cls(chart, [(t ** k, f) for k, f in sorted(powers.items()) if not f.is_zero()])

    @classmethod
    def zero(cls, chart) -> "TimeField":
        return cls(chart, [])

    def by_power(self) -> dict:
        """{k: V_k} with the component equal to sum_k t^k V_k; zero V_k dropped."""
        if self._by_power is None:
            acc: dict = {}
            for w, f in self.terms:
                for e, c in w.terms.items():
                    k = e[0]
                    acc[k] = acc[k] + f * c if k in acc else f * c
            self._by_power = {k: v for k, v in sorted(acc.items()) if not v.is_zero()}
        return self._by_power

    def simplified(self) -> "TimeField":
        return TimeField.from_powers(self.chart, self.by_power())

    def constituent_fields(self) -> list:
        return list(self.by_power().values())

    def is_zero(self) -> bool:
        return not self.by_power()

    def time_degree(self) -> int:
        return max(self.by_power(), default=-1)

    def at(self, t) -> VectorField:
        t = as_fraction(t)
        out = VectorField.zero(self.chart)
        for k, f in self.by_power().items():
            out = out + f * (t ** k)
        return out

    def component(self, i: int) -> RationalFunction:
        """Component i as a rational function of (chart..., t)."""
        vs = self.chart + (TIME,)
        total = RationalFunction.constant(0, vs)
        tt = Polynomial.variable(TIME, vs)
        for k, f in self.by_power().items():
            total = total + f.coeffs[i].embed(vs) * (tt ** k)
        return total

    def components(self) -> list:
        return [self.component(i) for i in range(len(self.chart))]

    def __add__(self, other: "TimeField") -> "TimeField":
        if other.chart != self.chart:
            raise ChartMismatchError("TimeFields on different charts")
        return TimeField(self.chart, self.terms + other.terms)

    def __neg__(self):
        return TimeField(self.chart, [(-w, f) for w, f in self.terms])

    def scale(self, c) -> "TimeField":
        c = as_fraction(c)
        return TimeField(self.chart, [(w * c, f) for w, f in self.terms])

    def __eq__(self, other):
        if not isinstance(other, TimeField):
            return NotImplemented
        if self.chart != other.chart:
            return False
        a, b = self.by_power(), other.by_power()
        return a.keys() == b.keys() and all(a[k] == b[k] for k in a)

    def __hash__(self):
        return hash((self.chart, tuple(self.by_power().items())))

    def to_dict(self) -> list:
        return [{"t_poly": str(w), "field": {"coeffs": [str(c) for c in f.coeffs]}} for w, f in self.terms]

    def __str__(self):
        parts = []
        for w, f in self.terms:
            ws = str(w)
            parts.append(f"[{f}]" if ws == "1" else f"({ws})*[{f}]")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"TimeField({self})"


@dataclass(frozen=True)
class StochOperator:
    """Drift plus noise components, flagged Itô or Stratonovich."""

    chart: tuple
    interpretation: str
    drift: TimeField
    noises: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "chart", make_chart(self.chart))
        interp = self.interpretation.lower()
        if interp not in (ITO, STRAT):
            raise ValueError(f"interpretation must be 'ito' or 'stratonovich', got {self.interpretation!r}")
        object.__setattr__(self, "interpretation", interp)
        object.__setattr__(self, "noises", tuple(self.noises))
        for comp in (self.drift,) + self.noises:
            if comp.chart != self.chart:
                raise ChartMismatchError(f"component chart {comp.chart} differs from {self.chart}")

    @property
    def ell(self) -> int:
        return 1 + len(self.noises)

    @property
    def dim(self) -> int:
        return len(self.chart)

    def components(self) -> tuple:
        return (self.drift,) + self.noises

    def with_(self, **kw) -> "StochOperator":
        data = dict(chart=self.chart, interpretation=self.interpretation, drift=self.drift, noises=self.noises, name=self.name)
        data.update(kw)
        return StochOperator(**data)

    def equivalent(self, other: "StochOperator") -> bool:
        """Same interpretation and componentwise equal coefficients."""
        return (
            self.chart == other.chart
            and self.interpretation == other.interpretation
            and self.drift == other.drift
            and len(self.noises) == len(other.noises)
            and all(a == b for a, b in zip(self.noises, other.noises))
        )

    def to_dict(self) -> dict:
        return {
            "vars": list(self.chart),
            "interpretation": self.interpretation,
            "drift": self.drift.to_dict(),
            "noises": [n.to_dict() for n in self.noises],
        }


def _directional(W: VectorField, V: VectorField) -> VectorField:
    """(W(V^i))_i; the per-component derivative of V along W."""
    return VectorField._make(V.chart, [W.apply(c) for c in V.coeffs])


def correction_field(noises: Sequence[TimeField]) -> dict:
    """{k: C_k} with sum_k t^k C_k = sum_b sum_j (dS_b/dx_j) S_b^j."""
    acc: dict = {}
    for S in noises:
        powers = S.by_power()
        for p, Vp in powers.items():
            for q, Vq in powers.items():
                d = _directional(Vq, Vp)
                if d.is_zero():
                    continue
                k = p + q
                acc[k] = acc[k] + d if k in acc else d
    return {k: v for k, v in sorted(acc.items()) if not v.is_zero()}


def _shift(op: StochOperator, sign: Fraction, target: str) -> StochOperator:
    t = Polynomial.variable(TIME)
    corr = correction_field(op.noises)
    extra = [(t ** k * sign, f) for k, f in corr.items()]
    return op.with_(interpretation=target, drift=TimeField(op.chart, op.drift.terms + tuple(extra)).simplified())


def ito_to_strat(op: StochOperator) -> StochOperator:
    if op.interpretation != ITO:
        raise InterpretationError("ito_to_strat expects an Itô operator")
    return _shift(op, Fraction(-1, 2), STRAT)


def strat_to_ito(op: StochOperator) -> StochOperator:
    if op.interpretation != STRAT:
        raise InterpretationError("strat_to_ito expects a Stratonovich operator")
    return _shift(op, Fraction(1, 2), ITO)


def convert(op: StochOperator, to: str) -> StochOperator:
    to = to.lower()
    if to == op.interpretation:
        return op
    return ito_to_strat(op) if to == STRAT else strat_to_ito(op)


@dataclass(frozen=True)
class LieClassification:
    verdict: str  # "StochasticLie" | "NotWithinBounds"
    algebra: LieAlgebraBasis | None = None
    coefficients: tuple = ()  # per component: tuple of TimePoly, one per basis element
    reason: str | None = None
    closure: ClosureResult | None = field(default=None, repr=False)
    foliated: str = "not-applicable"

    @property
    def is_lie(self) -> bool:
        return self.verdict == "StochasticLie"

    @property
    def dim(self):
        return self.algebra.dim if self.algebra else None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "foliated": self.foliated}
        if self.is_lie:
            out.update(self.algebra.to_json())
            out["relations"] = self.algebra.format_relations()
            out["coefficients"] = [[str(b) for b in comp] for comp in self.coefficients]
        else:
            out.update(self.closure.to_json() if self.closure else {"closed": False})
            out["reason"] = self.reason
        return out


_REASON_TEXT = {
    "degree": "closure degree bound",
    "dimension": "closure dimension bound",
    "depth": "closure depth bound",
}


def classify_stochastic_lie(op: StochOperator, bounds: Bounds | None = None, basis_hint=None, labels=()) -> LieClassification:
    """Decide whether a Stratonovich operator is a stochastic Lie system.

    ``basis_hint`` (optional) is a preferred basis; it is used for reporting
    when it spans exactly the algebra generated by the operator.
    """
    if op.interpretation != STRAT:
        raise InterpretationError(
            "classification needs the Stratonovich form; convert the Itô operator first"
        )
    gens = []
    for comp in op.components():
        gens.extend(comp.constituent_fields())
    if not gens:
        # the zero operator lives in the trivial algebra
        alg = LieAlgebraBasis((), {})
        return LieClassification("StochasticLie", alg, tuple(() for _ in op.components()), foliated="yes")
    res = closure(gens, bounds)
    if not res.closed:
        return LieClassification("NotWithinBounds", reason=_REASON_TEXT[res.reason], closure=res)
    alg = res.algebra
    if basis_hint is not None:
        hint = list(basis_hint)
        if same_span(hint, alg.basis):
            alg = structure_constants(hint, labels)
    t = Polynomial.variable(TIME)
    coeffs = []
    for comp in op.components():
        acc = [Polynomial.constant(0, (TIME,)) for _ in range(alg.dim)]
        for k, f in comp.by_power().items():
            c = span_membership(f, alg.basis)
            if c is None:  # pragma: no cover - closure guarantees membership
                raise DecompositionMismatch("component field escaped the closed algebra", residual=f)
            for a, v in enumerate(c):
                if v:
                    acc[a] = acc[a] + t ** k * v
        coeffs.append(tuple(acc))
    return LieClassification("StochasticLie", alg, tuple(coeffs), closure=res, foliated="yes")


def _apply_ext(Y: VectorField, b: RationalFunction) -> RationalFunction:
    vs = Y.chart + (TIME,)
    b = b.embed(vs)
    total = RationalFunction.constant(0, vs)
    for v, c in zip(Y.chart, Y.coeffs):
        if not c.is_zero():
            total = total + c.embed(vs) * b.derive(v)
    return total


def classify_foliated(op: StochOperator, fields: Sequence[VectorField], coefficients: Sequence[Sequence]) -> bool:
    """True iff every b_j^a is a common first integral of all Y_b.

    ``coefficients[j][a]`` multiplies ``fields[a]`` in component j; entries
    may be strings or rational functions of the chart variables and ``t``.
    """
    vs = op.chart + (TIME,)
    comps = op.components()
    if len(coefficients) != len(comps):
        raise ValueError(f"{len(coefficients)} coefficient rows for {len(comps)} components")
    fields = list(fields)
    parsed = []
    for j, (comp, row) in enumerate(zip(comps, coefficients)):
        if len(row) != len(fields):
            raise ValueError(f"component {j}: {len(row)} coefficients for {len(fields)} fields")
        row = [RationalFunction.parse(b, vs) if isinstance(b, str) else RationalFunction.coerce(b, vs).embed(vs) for b in row]
        parsed.append(row)
        for i in range(len(op.chart)):
            recon = RationalFunction.constant(0, vs)
            for b, Y in zip(row, fields):
                recon = recon + b * Y.coeffs[i].embed(vs)
            target = comp.component(i)
            if not (recon == target):
                raise DecompositionMismatch(
                    f"component {j}, coordinate {op.chart[i]}: decomposition differs by {target - recon}",
                    component=(j, i),
                    residual=target - recon,
                )
    for row in parsed:
        for b in row:
            for Y in fields:
                if not _apply_ext(Y, b).is_zero():
                    return False
    return True
