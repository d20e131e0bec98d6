"""Vector fields with exact rational-function coefficients on a coordinate chart."""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import ChartMismatchError, PoleError, UnknownVariableError
from .polyalg import TIME, Polynomial, RationalFunction, as_fraction, parse_rational

__all__ = ["Chart", "VectorField", "lie_bracket", "make_chart"]

Chart = tuple


def make_chart(variables: Sequence[str]) -> tuple:
    chart = tuple(variables)
    if not chart:
        raise ValueError("a chart needs at least one coordinate")
    if len(set(chart)) != len(chart):
        raise ValueError(f"duplicate coordinates in chart {chart}")
    if TIME in chart:
        raise ValueError(f"{TIME!r} is reserved for time and cannot be a coordinate")
    return chart


class VectorField:
    """X = sum_i X^i(x) d/dx_i over a fixed chart."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: Sequence[str], coeffs: Sequence):
        chart = make_chart(chart)
        if len(coeffs) != len(chart):
            raise ValueError(f"{len(coeffs)} components given for a {len(chart)}-dimensional chart")
        out = []
        for c in coeffs:
            if isinstance(c, str):
                c = parse_rational(c, chart)
            else:
                c = RationalFunction.coerce(c, chart)
            bad = [v for v in c.used_variables() if v not in chart]
            if bad:
                raise UnknownVariableError(bad[0], chart)
            out.append(c.embed(chart))
        self.chart = chart
        self.coeffs = tuple(out)

    @classmethod
    def _make(cls, chart, coeffs):
        obj = object.__new__(cls)
        obj.chart = chart
        obj.coeffs = tuple(coeffs)
        return obj

    @classmethod
    def zero(cls, chart) -> "VectorField":
        chart = make_chart(chart)
        return cls._make(chart, [RationalFunction.constant(0, chart)] * len(chart))

    @classmethod
    def parse(cls, chart, components: Sequence[str], constants=None) -> "VectorField":
        chart = make_chart(chart)
        return cls(chart, [parse_rational(s, chart, constants) for s in components])

    @property
    def dim(self) -> int:
        return len(self.chart)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.coeffs)

    def degree(self) -> int:
        return max(c.degree() for c in self.coeffs)

    def _check(self, other: "VectorField"):
        if not isinstance(other, VectorField):
            raise TypeError(f"expected VectorField, got {type(other).__name__}")
        if other.chart != self.chart:
            raise ChartMismatchError(f"charts differ: {self.chart} vs {other.chart}")

    def __add__(self, other):
        self._check(other)
        return VectorField._make(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return VectorField._make(self.chart, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return VectorField._make(self.chart, [-a for a in self.coeffs])

    def __mul__(self, scalar):
        """Scale by a rational number or a function on the chart."""
        if isinstance(scalar, (Polynomial, RationalFunction)):
            bad = [v for v in scalar.used_variables() if v not in self.chart]
            if bad:
                raise UnknownVariableError(bad[0], self.chart)
            s = RationalFunction.coerce(scalar).embed(self.chart)
        else:
            s = as_fraction(scalar)
        return VectorField._make(self.chart, [c * s for c in self.coeffs])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.chart, self.coeffs))

    def apply(self, f) -> RationalFunction:
        """Directional derivative X(f) = sum X^i df/dx_i."""
        f = RationalFunction.coerce(f, self.chart)
        bad = [v for v in f.used_variables() if v not in self.chart]
        if bad:
            raise UnknownVariableError(bad[0], self.chart)
        f = f.embed(self.chart)
        total = RationalFunction.constant(0, self.chart)
        for v, c in zip(self.chart, self.coeffs):
            if c.is_zero():
                continue
            d = f.derive(v)
            if not d.is_zero():
                total = total + c * d
        return total

    def bracket(self, other: "VectorField") -> "VectorField":
        return lie_bracket(self, other)

    def evaluate(self, point):
        """Numeric or exact value at a point (mapping or sequence in chart order)."""
        if not isinstance(point, Mapping):
            if len(point) != self.dim:
                raise ValueError(f"point has {len(point)} entries, chart has {self.dim}")
            point = dict(zip(self.chart, point))
        out = []
        for i, c in enumerate(self.coeffs):
            try:
                out.append(c.evaluate(point))
            except PoleError as exc:
                raise PoleError(
                    f"component {i} ({self.chart[i]}) has a pole at {dict(point)}: denominator {c.den}",
                    label=f"X^{self.chart[i]}",
                ) from exc
        return tuple(out)

    def rename(self, mapping: Mapping[str, str]) -> "VectorField":
        chart = tuple(mapping.get(v, v) for v in self.chart)
        return VectorField._make(make_chart(chart), [c.rename(mapping) for c in self.coeffs])

    def embed(self, chart: Sequence[str]) -> "VectorField":
        """Extend to a larger chart (zero components on the new coordinates)."""
        chart = make_chart(chart)
        missing = [v for v in self.chart if v not in chart]
        if missing:
            raise ChartMismatchError(f"coordinates {missing} not in target chart {chart}")
        lookup = dict(zip(self.chart, self.coeffs))
        zero = RationalFunction.constant(0, chart)
        return VectorField._make(chart, [lookup[v].embed(chart) if v in lookup else zero for v in chart])

    def to_dict(self) -> dict:
        return {"chart": list(self.chart), "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: Mapping, constants=None) -> "VectorField":
        return cls.parse(data["chart"], data["coeffs"], constants)

    def __str__(self):
        parts = []
        for v, c in zip(self.chart, self.coeffs):
            if c.is_zero():
                continue
            s = str(c)
            if " " in s and not s.startswith("("):
                s = f"({s})"
            parts.append(f"{s}*d/d{v}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"VectorField({self})"


def lie_bracket(a: VectorField, b: VectorField) -> VectorField:
    """[A, B]^i = sum_j (A^j dB^i/dx_j - B^j dA^i/dx_j)."""
    a._check(b)
    return VectorField._make(a.chart, [a.apply(bi) - b.apply(ai) for ai, bi in zip(a.coeffs, b.coeffs)])
