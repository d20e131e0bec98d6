"""Span membership, bracket closure and structure constants.

Linear (in)dependence is always decided exactly: denominators are cleared
component by component and the resulting monomial-coefficient vectors are
row-reduced over Q.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ChartMismatchError, NotClosedError
from .polyalg import Polynomial, solve_linear_over_Q
from .vecfield import VectorField, lie_bracket

__all__ = [
    "Bounds",
    "LieAlgebraBasis",
    "ClosureResult",
    "span_membership",
    "closure",
    "structure_constants",
    "same_span",
    "is_independent",
]


@dataclass(frozen=True)
class Bounds:
    max_dim: int = 50
    max_depth: int = 10
    max_degree: int | None = None  # None: 3 + max generator degree

    def __post_init__(self):
        if self.max_dim < 1 or self.max_depth < 0:
            raise ValueError("bounds must be positive")
        if self.max_degree is not None and self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")

    def resolved_degree(self, generators: Sequence[VectorField]) -> int:
        if self.max_degree is not None:
            return self.max_degree
        return 3 + max((g.degree() for g in generators), default=0)


def _common_chart(fields: Sequence[VectorField]):
    charts = {f.chart for f in fields}
    if len(charts) > 1:
        raise ChartMismatchError(f"fields live on different charts: {sorted(charts)}")
    return next(iter(charts)) if charts else None


def _cleared_columns(fields: Sequence[VectorField]):
    """Monomial-coefficient columns after clearing denominators per component."""
    chart = fields[0].chart
    n = len(chart)
    cols = [dict() for _ in fields]
    for i in range(n):
        dens: list[Polynomial] = []
        for f in fields:
            d = f.coeffs[i].den
            if not d.is_constant() and not any(d == e for e in dens):
                dens.append(d)
        for k, f in enumerate(fields):
            c = f.coeffs[i]
            if c.is_zero():
                continue
            scale = c.num * (1 / c.den.constant_value()) if c.den.is_constant() else c.num
            for d in dens:
                if not (d == c.den):
                    scale = scale * d
            for e, v in scale.terms.items():
                cols[k][(i, e)] = v
    return cols


def _solve_in_span(target: VectorField, basis: Sequence[VectorField]):
    if not basis:
        return () if target.is_zero() else None
    cols = _cleared_columns(list(basis) + [target])
    keys = sorted(set().union(*[c.keys() for c in cols]))
    if not keys:
        return tuple(Fraction(0) for _ in basis)
    rows = [[c.get(k, Fraction(0)) for c in cols[:-1]] for k in keys]
    rhs = [cols[-1].get(k, Fraction(0)) for k in keys]
    sol = solve_linear_over_Q(rows, rhs)
    if sol is None:
        return None
    return sol.particular


def span_membership(target: VectorField, basis: Sequence[VectorField]):
    """Constant coefficients c with target = sum c_a basis_a, or None if not in the span.

    If ``basis`` is dependent, one particular solution is returned.
    """
    _common_chart(list(basis) + [target])
    return _solve_in_span(target, basis)


def is_independent(fields: Sequence[VectorField]) -> bool:
    fields = list(fields)
    if not fields:
        return True
    _common_chart(fields)
    cols = _cleared_columns(fields)
    keys = sorted(set().union(*[c.keys() for c in cols]))
    if not keys:
        return False
    from .polyalg import rank

    return rank([[c.get(k, Fraction(0)) for c in cols] for k in keys]) == len(fields)


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class LieAlgebraBasis:
    """Independent fields Y_0..Y_{r-1} with [Y_a, Y_b] = sum_g c[(a, b)][g] Y_g."""

    basis: tuple
    structure: dict  # (a, b) with a < b -> tuple of r Fractions
    labels: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def chart(self):
        return self.basis[0].chart if self.basis else None

    def c(self, a: int, b: int, g: int) -> Fraction:
        if a == b:
            return Fraction(0)
        if a < b:
            return self.structure[(a, b)][g]
        return -self.structure[(b, a)][g]

    def bracket_coeffs(self, a: int, b: int) -> tuple:
        return tuple(self.c(a, b, g) for g in range(self.dim))

    def coordinates(self, X: VectorField):
        """Coefficients of X in this basis, or None."""
        return span_membership(X, self.basis)

    def relations(self):
        """Nonzero brackets as (a, b, {g: c}) with a < b."""
        out = []
        for (a, b), row in sorted(self.structure.items()):
            nz = {g: v for g, v in enumerate(row) if v}
            if nz:
                out.append((a, b, nz))
        return out

    def name(self, a: int) -> str:
        return self.labels[a] if a < len(self.labels) else f"Y{a + 1}"

    def format_relations(self):
        lines = []
        for a, b in sorted(self.structure):
            row = self.structure[(a, b)]
            terms = []
            for g, v in enumerate(row):
                if not v:
                    continue
                mag = abs(v)
                s = self.name(g) if mag == 1 else f"{_fmt(mag)}*{self.name(g)}"
                terms.append(("-" if v < 0 else "+", s))
            if not terms:
                rhs = "0"
            else:
                rhs = ("-" if terms[0][0] == "-" else "") + terms[0][1]
                rhs += "".join(f" {sg} {s}" for sg, s in terms[1:])
            lines.append(f"[{self.name(a)},{self.name(b)}] = {rhs}")
        return lines

    def check_jacobi(self) -> bool:
        r = self.dim
        for a in range(r):
            for b in range(a + 1, r):
                for d in range(b + 1, r):
                    for g in range(r):
                        s = Fraction(0)
                        for e in range(r):
                            s += (
                                self.c(a, b, e) * self.c(e, d, g)
                                + self.c(b, d, e) * self.c(e, a, g)
                                + self.c(d, a, e) * self.c(e, b, g)
                            )
                        if s:
                            return False
        return True

    def to_json(self) -> dict:
        return {
            "closed": True,
            "dim": self.dim,
            "basis": [f.to_dict() for f in self.basis],
            "structure": [
                [a, b, g, _fmt(v)]
                for (a, b), row in sorted(self.structure.items())
                for g, v in enumerate(row)
                if v
            ],
        }


@dataclass(frozen=True)
class ClosureResult:
    closed: bool
    algebra: LieAlgebraBasis | None = None
    reason: str | None = None  # "dimension" | "degree" | "depth"
    witness: tuple = ()
    partial: tuple = field(default=(), repr=False)

    @property
    def dim(self):
        return self.algebra.dim if self.algebra else len(self.partial)

    def to_json(self) -> dict:
        if self.closed:
            return self.algebra.to_json()
        return {
            "closed": False,
            "dim": None,
            "basis": [f.to_dict() for f in self.partial],
            "structure": [],
            "reason": self.reason,
            "witness": [f.to_dict() for f in self.witness],
        }


def _verify(basis, structure):
    alg = LieAlgebraBasis(tuple(basis), structure)
    if not alg.check_jacobi():
        raise NotClosedError("structure constants violate the Jacobi identity")
    return alg


def closure(generators: Sequence[VectorField], bounds: Bounds | None = None, labels=()) -> ClosureResult:
    """Breadth-first bracket saturation of ``generators``."""
    bounds = bounds or Bounds()
    generators = list(generators)
    if not generators:
        raise ValueError("closure needs at least one generator")
    _common_chart(generators)
    max_degree = bounds.resolved_degree(generators)

    basis: list[VectorField] = []
    depth: list[int] = []
    kept_labels = []
    for idx, g in enumerate(generators):
        if g.is_zero() or _solve_in_span(g, basis) is not None:
            continue
        if len(basis) + 1 > bounds.max_dim:
            return ClosureResult(False, reason="dimension", witness=(g,), partial=tuple(basis))
        basis.append(g)
        depth.append(0)
        if idx < len(labels):
            kept_labels.append(labels[idx])

    known: dict = {}
    queue = deque((a, b) for a in range(len(basis)) for b in range(a + 1, len(basis)))
    while queue:
        a, b = queue.popleft()
        br = lie_bracket(basis[a], basis[b])
        coeffs = _solve_in_span(br, basis)
        if coeffs is not None:
            known[(a, b)] = coeffs
            continue
        d = max(depth[a], depth[b]) + 1
        if br.degree() > max_degree:
            return ClosureResult(False, reason="degree", witness=(br,), partial=tuple(basis))
        if d > bounds.max_depth:
            return ClosureResult(False, reason="depth", witness=(br,), partial=tuple(basis))
        if len(basis) + 1 > bounds.max_dim:
            return ClosureResult(False, reason="dimension", witness=(br,), partial=tuple(basis))
        new = len(basis)
        basis.append(br)
        depth.append(d)
        known[(a, b)] = tuple([Fraction(0)] * new + [Fraction(1)])
        queue.extend((k, new) for k in range(new))

    r = len(basis)
    structure = {k: tuple(v) + (Fraction(0),) * (r - len(v)) for k, v in known.items()}
    alg = _verify(basis, structure)
    if kept_labels and len(kept_labels) == r:
        alg = LieAlgebraBasis(alg.basis, alg.structure, tuple(kept_labels))
    return ClosureResult(True, alg)


def structure_constants(basis: Sequence[VectorField], labels=()) -> LieAlgebraBasis:
    """Structure constants of an independent, bracket-closed family."""
    basis = list(basis)
    _common_chart(basis)
    if not is_independent(basis):
        raise ValueError("basis fields are linearly dependent")
    structure = {}
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            br = lie_bracket(basis[a], basis[b])
            coeffs = _solve_in_span(br, basis)
            if coeffs is None:
                raise NotClosedError(f"[{a},{b}] = {br} is not in the span", pair=(a, b), bracket=br)
            structure[(a, b)] = tuple(coeffs)
    alg = _verify(basis, structure)
    return LieAlgebraBasis(alg.basis, alg.structure, tuple(labels))


def same_span(a: Sequence[VectorField], b: Sequence[VectorField]) -> bool:
    """True when two families span the same space over the constants."""
    return all(_solve_in_span(x, list(b)) is not None for x in a) and all(
        _solve_in_span(y, list(a)) is not None for y in b
    )
