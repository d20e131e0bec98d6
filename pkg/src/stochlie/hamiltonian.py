"""Symplectic forms, Hamiltonian functions, Lie-Hamilton algebras and Casimirs.

Sign conventions, fixed once for the whole package:

* the Hamiltonian field of f is defined by ``i_{X_f} omega = df`` where
  ``(i_X omega)_j = sum_i X^i omega_ij``;
* the Poisson bracket is ``{f, g} = omega(X_f, X_g) = X_g(f)``.

With these, ``{q, p} = 1`` for ``omega = dq ^ dp`` and
``X_{{f,g}} = -[X_f, X_g]``.

Hamiltonians may carry logarithms (``log|P|`` with P an irreducible
polynomial), which is what the Lotka-Volterra fields need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ChartMismatchError, PoleError
from .liealg import Bounds, LieAlgebraBasis
from .polyalg import (
    Polynomial,
    RationalFunction,
    as_fraction,
    parse_polynomial,
    rank,
    solve_linear_over_Q,
    solve_linear_rf,
)
from .prolong import copy_name, diagonal_prolong, first_integrals_poly, prolonged_chart
from .vecfield import VectorField, make_chart

__all__ = [
    "SymplecticForm",
    "HamiltonianFunction",
    "NotHamiltonian",
    "hamiltonian_of",
    "poisson_bracket",
    "LieHamiltonAlgebra",
    "lie_hamilton_algebra",
    "is_hamiltonian_system",
    "ConservedQuantities",
    "conserved_search",
    "CasimirElement",
    "casimir_verify",
    "coalgebra_constant",
    "sl2_casimir",
    "oscillator_casimir",
]


# ---------------------------------------------------------------------------
# symplectic forms


class SymplecticForm:
    """omega = sum_{i<j} omega_ij dx_i ^ dx_j on a chart of even dimension."""

    def __init__(self, chart: Sequence[str], matrix: Sequence[Sequence], check: bool = True):
        chart = make_chart(chart)
        n = len(chart)
        if n % 2:
            raise ValueError(f"symplectic charts have even dimension, got {n}")
        if len(matrix) != n or any(len(r) != n for r in matrix):
            raise ValueError(f"matrix must be {n}x{n}")
        M = [
            [RationalFunction.parse(x, chart) if isinstance(x, str) else RationalFunction.coerce(x, chart).embed(chart) for x in row]
            for row in matrix
        ]
        self.chart = chart
        self.matrix = M
        if check:
            self._check()
        self._inv_t = None

    @classmethod
    def from_pairs(cls, chart: Sequence[str], pairs: Sequence, factor="1") -> "SymplecticForm":
        """factor * sum dq ^ dp over the (q, p) name pairs."""
        chart = make_chart(chart)
        n = len(chart)
        f = RationalFunction.parse(factor, chart) if isinstance(factor, str) else RationalFunction.coerce(factor, chart)
        zero = RationalFunction.constant(0, chart)
        M = [[zero] * n for _ in range(n)]
        for q, p in pairs:
            i, j = chart.index(q), chart.index(p)
            M[i][j] = f
            M[j][i] = -f
        return cls(chart, M)

    @classmethod
    def canonical(cls, chart: Sequence[str]) -> "SymplecticForm":
        """Pairs (chart[0], chart[1]), (chart[2], chart[3]), ..."""
        chart = make_chart(chart)
        return cls.from_pairs(chart, [(chart[i], chart[i + 1]) for i in range(0, len(chart), 2)])

    def _check(self):
        n = len(self.chart)
        M = self.matrix
        for i in range(n):
            for j in range(n):
                if not (M[i][j] == -M[j][i]):
                    raise ValueError(f"omega is not antisymmetric at ({self.chart[i]}, {self.chart[j]})")
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    s = M[i][j].derive(self.chart[k]) + M[j][k].derive(self.chart[i]) + M[k][i].derive(self.chart[j])
                    if not s.is_zero():
                        raise ValueError(f"omega is not closed (component {self.chart[i]},{self.chart[j]},{self.chart[k]})")
        from .prolong import _random_point
        import random

        rng = random.Random(0)
        for _ in range(20):
            pt = _random_point(self.chart, rng)
            try:
                vals = [[x.evaluate(pt) for x in row] for row in M]
            except PoleError:
                continue
            if rank(vals) == n:
                return
        raise ValueError("omega is degenerate at generic sample points")

    def contract(self, X: VectorField) -> list:
        """Components alpha_j of i_X omega."""
        if X.chart != self.chart:
            raise ChartMismatchError(f"field chart {X.chart} differs from {self.chart}")
        n = len(self.chart)
        out = []
        for j in range(n):
            acc = RationalFunction.constant(0, self.chart)
            for i in range(n):
                w = self.matrix[i][j]
                if not w.is_zero() and not X.coeffs[i].is_zero():
                    acc = acc + X.coeffs[i] * w
            out.append(acc)
        return out

    def field_from_differential(self, grad: Sequence[RationalFunction]) -> VectorField:
        """X with i_X omega = sum grad_j dx_j."""
        n = len(self.chart)
        if self._inv_t is None:
            cols = []
            for j in range(n):
                e = [RationalFunction.constant(int(i == j), self.chart) for i in range(n)]
                col = solve_linear_rf([[self.matrix[i][r] for i in range(n)] for r in range(n)], e)
                if col is None:
                    raise ValueError("omega is degenerate; cannot invert")
                cols.append(col)
            self._inv_t = cols  # cols[j][i] = (omega^T)^{-1}_{ij}
        coeffs = []
        for i in range(n):
            acc = RationalFunction.constant(0, self.chart)
            for j in range(n):
                g = grad[j]
                if not g.is_zero():
                    acc = acc + self._inv_t[j][i] * g
            coeffs.append(acc)
        return VectorField._make(self.chart, coeffs)

    def hamiltonian_field(self, f) -> VectorField:
        if isinstance(f, HamiltonianFunction):
            return self.field_from_differential(f.gradient())
        f = RationalFunction.parse(f, self.chart) if isinstance(f, str) else RationalFunction.coerce(f, self.chart).embed(self.chart)
        return self.field_from_differential([f.derive(v) for v in self.chart])

    def to_json(self):
        n = len(self.chart)
        return {
            "chart": list(self.chart),
            "matrix": [[str(self.matrix[i][j]) for j in range(n)] for i in range(n)],
        }


# ---------------------------------------------------------------------------
# Hamiltonian functions with logarithms


def _primitive(p: Polynomial):
    """(content-free P with positive leading coefficient, scalar) with p = scalar * P."""
    c = p.content()
    q = p * (1 / c)
    if q.leading_coefficient() < 0:
        q, c = -q, -c
    return q, c


def _merge_logs(logs):
    out: list = []
    for c, P in logs:
        if not c or P.is_constant():
            continue
        for idx, (c2, P2) in enumerate(out):
            if P2 == P:
                out[idx] = (c2 + c, P2)
                break
        else:
            out.append((c, P))
    return tuple((c, P) for c, P in out if c)


def _factor_logs(coeff: Fraction, P: Polynomial):
    """coeff*log|P| split over irreducible factors."""
    import sympy

    if P.is_constant():
        return []
    vs = P.variables
    syms = sympy.symbols(" ".join(f"_s{i}" for i in range(len(vs))) + " _dummy")[: len(vs)]
    expr = _to_sympy(P, syms)
    _, factors = sympy.factor_list(expr, *syms)
    out = []
    for fexpr, e in factors:
        fp = _from_sympy_poly(fexpr, syms, vs)
        fp, _ = _primitive(fp)
        out.append((coeff * e, fp))
    return out


def _to_sympy(p: Polynomial, syms):
    import sympy

    total = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, e):
            if k:
                term *= s ** k
        total += term
    return total


def _from_sympy_poly(expr, syms, variables) -> Polynomial:
    import sympy

    poly = sympy.Poly(expr, *syms, domain="QQ")
    terms = {}
    for mon, c in poly.terms():
        c = sympy.Rational(c)
        terms[tuple(int(k) for k in mon)] = Fraction(int(c.p), int(c.q))
    return Polynomial(variables, terms)


@dataclass(frozen=True)
class HamiltonianFunction:
    """rational + sum_k c_k log|P_k|."""

    rational: RationalFunction
    logs: tuple = ()

    @property
    def chart(self):
        return self.rational.variables

    @classmethod
    def of(cls, f, chart=None) -> "HamiltonianFunction":
        if isinstance(f, HamiltonianFunction):
            return f
        if isinstance(f, str):
            return cls(RationalFunction.parse(f, chart))
        r = RationalFunction.coerce(f, chart or ())
        return cls(r.embed(chart) if chart else r)

    def is_rational(self) -> bool:
        return not self.logs

    def derive(self, v: str) -> RationalFunction:
        d = self.rational.derive(v)
        for c, P in self.logs:
            dp = P.derive(v, strict=False)
            if not dp.is_zero():
                d = d + RationalFunction(dp, P) * c
        return d

    def gradient(self) -> list:
        return [self.derive(v) for v in self.chart]

    def __add__(self, other):
        other = HamiltonianFunction.of(other, self.chart)
        return HamiltonianFunction(self.rational + other.rational, _merge_logs(self.logs + other.logs))

    def __neg__(self):
        return HamiltonianFunction(-self.rational, tuple((-c, P) for c, P in self.logs))

    def __sub__(self, other):
        return self + (-HamiltonianFunction.of(other, self.chart))

    def __mul__(self, c):
        c = as_fraction(c)
        return HamiltonianFunction(self.rational * c, _merge_logs(tuple((c * k, P) for k, P in self.logs)))

    __rmul__ = __mul__

    def is_constant(self) -> bool:
        return not self.logs and self.rational.is_constant()

    def __eq__(self, other):
        if not isinstance(other, (HamiltonianFunction, RationalFunction, Polynomial, int, Fraction)):
            return NotImplemented
        diff = self - other
        return diff.rational.is_zero() and not diff.logs

    def __hash__(self):
        return hash(self.rational)

    def normalized(self) -> "HamiltonianFunction":
        """Fix the additive constant: the numerator has no multiple of the denominator's leading monomial."""
        r = self.rational
        lead_e, _ = r.den.leading_term()
        c = r.num.terms.get(lead_e, Fraction(0))
        if c:
            r = RationalFunction(r.num - r.den * c, r.den)
        return HamiltonianFunction(r, self.logs)

    def evaluate(self, point):
        import math

        val = self.rational.evaluate(point)
        if not self.logs:
            return val
        val = float(val)
        for c, P in self.logs:
            pv = float(P.evaluate(point))
            if pv == 0:
                raise PoleError(f"log|{P}| is singular at {dict(point)}")
            val += float(c) * math.log(abs(pv))
        return val

    def __str__(self):
        parts = [] if self.rational.is_zero() and self.logs else [str(self.rational)]
        for c, P in self.logs:
            cs = "" if c == 1 else ("-" if c == -1 else f"{c}*")
            parts.append(f"{cs}log|{P}|")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"HamiltonianFunction({self})"


@dataclass(frozen=True)
class NotHamiltonian:
    reason: str  # "not closed" | "not representable" | "no base point"
    component: tuple = ()
    value: object = None
    field_index: int | None = None

    def __bool__(self):
        return False

    def to_json(self):
        out = {"hamiltonian": False, "reason": self.reason}
        if self.component:
            out["component"] = list(self.component)
        if self.value is not None:
            out["value"] = str(self.value)
        if self.field_index is not None:
            out["field"] = self.field_index
        return out


class _NotRepresentable(Exception):
    pass


def _antiderivative(R: RationalFunction, v: str):
    """(rational part, logs) with d/dv equal to R."""
    vs = R.variables
    if R.den.degree_in(v) <= 0:
        i = vs.index(v)
        out = {}
        for e, c in R.num.terms.items():
            k = e[i] + 1
            out[e[:i] + (k,) + e[i + 1:]] = c / k
        return RationalFunction(Polynomial(vs, out), R.den), ()
    import sympy
    from sympy.integrals.rationaltools import ratint

    syms = sympy.symbols(" ".join(f"_s{i}" for i in range(len(vs))) + " _dummy")[: len(vs)]
    x = syms[vs.index(v)]
    expr = _to_sympy(R.num, syms) / _to_sympy(R.den, syms)
    res = ratint(expr, x)
    if res.has(sympy.atan) or res.has(sympy.RootSum) or res.has(sympy.I):
        raise _NotRepresentable(str(res))
    rational = sympy.Integer(0)
    logs = []
    for term in sympy.Add.make_args(sympy.expand_log(res, force=False)):
        if term.has(sympy.log):
            coeff, rest = term.as_independent(sympy.log, as_Add=False)
            if not coeff.is_Rational or not isinstance(rest, sympy.log):
                raise _NotRepresentable(str(term))
            num, den = sympy.fraction(sympy.together(rest.args[0]))
            c = Fraction(int(coeff.p), int(coeff.q))
            logs.extend(_factor_logs(c, _from_sympy_poly(num, syms, vs)))
            logs.extend(_factor_logs(-c, _from_sympy_poly(den, syms, vs)))
        else:
            rational += term
    num, den = sympy.fraction(sympy.together(rational))
    rat = RationalFunction(_from_sympy_poly(num, syms, vs), _from_sympy_poly(den, syms, vs))
    return rat, tuple(logs)


def _subs_value(R: RationalFunction, v: str, value: Fraction):
    d = R.den.subs({v: value})
    if d.is_zero():
        raise PoleError(f"denominator of {R} vanishes at {v}={value}")
    return RationalFunction(R.num.subs({v: value}), d)


def _integrate_closed(alpha: Sequence[RationalFunction], chart, base) -> HamiltonianFunction:
    """Axis-parallel path integral of a closed 1-form from ``base``."""
    n = len(chart)
    total_rat = RationalFunction.constant(0, chart)
    logs: list = []
    for j in range(n):
        g = alpha[j]
        for k in range(j + 1, n):
            g = _subs_value(g, chart[k], base[k])
        if g.is_zero():
            continue
        rat, lg = _antiderivative(g, chart[j])
        total_rat = total_rat + rat - _subs_value(rat, chart[j], base[j])
        for c, P in lg:
            logs.append((c, P))
            Pb = P.subs({chart[j]: base[j]})
            if Pb.is_zero():
                raise PoleError(f"log|{P}| singular at the base point")
            if not Pb.is_constant():
                Pb, _ = _primitive(Pb)
                logs.append((-c, Pb))
    merged = []
    for c, P in logs:
        merged.extend(_factor_logs(c, P) if not P.is_constant() else [])
    return HamiltonianFunction(total_rat, _merge_logs(merged))


DEFAULT_BASES = (1, 2, -1, 3, Fraction(1, 2), -2)


def hamiltonian_of(X: VectorField, omega: SymplecticForm, base_points=None):
    """h with dh = i_X omega, verified exactly; or NotHamiltonian."""
    chart = omega.chart
    alpha = omega.contract(X)
    for i in range(len(chart)):
        for j in range(i + 1, len(chart)):
            d = alpha[j].derive(chart[i]) - alpha[i].derive(chart[j])
            if not d.is_zero():
                return NotHamiltonian("not closed", (chart[i], chart[j]), d)
    if base_points is None:
        base_points = [tuple(Fraction(b) for _ in chart) for b in DEFAULT_BASES]
    for base in base_points:
        base = tuple(as_fraction(b) for b in base)
        try:
            h = _integrate_closed(alpha, chart, base)
        except PoleError:
            continue
        except _NotRepresentable as exc:
            return NotHamiltonian("not representable", value=str(exc))
        h = h.normalized()
        if all(h.derive(v) == a for v, a in zip(chart, alpha)):
            return h
    return NotHamiltonian("no base point")


def poisson_bracket(f, g, omega: SymplecticForm) -> RationalFunction:
    """{f, g} = X_g(f)."""
    F = HamiltonianFunction.of(f, omega.chart)
    G = HamiltonianFunction.of(g, omega.chart)
    Xg = omega.field_from_differential(G.gradient())
    total = RationalFunction.constant(0, omega.chart)
    for v, c in zip(omega.chart, Xg.coeffs):
        if not c.is_zero():
            total = total + c * F.derive(v)
    return total


# ---------------------------------------------------------------------------
# Lie-Hamilton algebras


@dataclass(frozen=True)
class LieHamiltonAlgebra:
    """Functions h_0..h_{r-1} (plus the constant 1 when ``central``).

    ``structure[(a, b)]`` lists the coefficients of {h_a, h_b} over the
    generators, the last one being the constant when central.
    """

    omega: SymplecticForm
    fields: tuple
    hamiltonians: tuple
    structure: dict
    central: bool = False

    @property
    def dim(self) -> int:
        return len(self.hamiltonians) + int(self.central)

    @property
    def generators(self) -> tuple:
        if self.central:
            return self.hamiltonians + (HamiltonianFunction.of(1, self.omega.chart),)
        return self.hamiltonians

    def bracket_coeffs(self, a, b):
        if a == b:
            return (Fraction(0),) * self.dim
        if a < b:
            return self.structure.get((a, b), (Fraction(0),) * self.dim)
        return tuple(-x for x in self.structure.get((b, a), (Fraction(0),) * self.dim))

    def function_of(self, weights) -> HamiltonianFunction:
        total = HamiltonianFunction.of(0, self.omega.chart)
        for w, h in zip(weights, self.hamiltonians):
            total = total + h * w
        return total

    def to_json(self):
        names = [f"h{i + 1}" for i in range(len(self.hamiltonians))] + (["1"] if self.central else [])
        rels = []
        for (a, b), row in sorted(self.structure.items()):
            rhs = ""
            for g, c in enumerate(row):
                if not c:
                    continue
                mag = abs(c)
                body = str(mag) if names[g] == "1" else (names[g] if mag == 1 else f"{mag}*{names[g]}")
                sign = "-" if c < 0 else "+"
                rhs = (f"-{body}" if sign == "-" else body) if not rhs else f"{rhs} {sign} {body}"
            rels.append(f"{{{names[a]},{names[b]}}} = {rhs or '0'}")
        return {
            "hamiltonian": True,
            "dim": self.dim,
            "central_extension": self.central,
            "hamiltonians": [str(h) for h in self.hamiltonians],
            "fields": [f.to_dict() for f in self.fields],
            "brackets": rels,
            "structure": [
                [a, b, g, str(c)] for (a, b), row in sorted(self.structure.items()) for g, c in enumerate(row) if c
            ],
        }


def lie_hamilton_algebra(fields: Sequence[VectorField], omega: SymplecticForm, algebra: LieAlgebraBasis | None = None):
    """Hamiltonian functions of a closed family and their Poisson structure.

    Returns NotHamiltonian (with ``field_index``) if any field fails.
    """
    fields = list(fields)
    if algebra is None:
        from .liealg import structure_constants

        algebra = structure_constants(fields)
    hams = []
    for idx, X in enumerate(fields):
        h = hamiltonian_of(X, omega)
        if not h:
            return NotHamiltonian(h.reason, h.component, h.value, idx)
        hams.append(h)
    r = len(hams)
    # {h_a, h_b} = -sum_g c^g_ab h_g + d_ab
    d = {}
    for a in range(r):
        for b in range(a + 1, r):
            br = HamiltonianFunction.of(poisson_bracket(hams[a], hams[b], omega), omega.chart)
            rest = br
            for g in range(r):
                c = algebra.c(a, b, g)
                if c:
                    rest = rest + hams[g] * c
            if not rest.is_constant():
                raise ValueError(f"bracket {{h{a + 1},h{b + 1}}} is not in the span of the Hamiltonians and 1")
            d[(a, b)] = rest.rational.constant_value()
    # try to absorb the constants: sum_g c^g_ab e_g = -d_ab
    central = any(d.values())
    if central:
        keys = sorted(d)
        sol = solve_linear_over_Q([[algebra.c(a, b, g) for g in range(r)] for a, b in keys], [-d[k] for k in keys])
        if sol is not None:
            hams = [h + e for h, e in zip(hams, sol.particular)]
            d = {k: Fraction(0) for k in keys}
            central = False
    structure = {}
    for a in range(r):
        for b in range(a + 1, r):
            row = [-algebra.c(a, b, g) for g in range(r)]
            if central:
                row.append(d[(a, b)])
            structure[(a, b)] = tuple(row)
    return LieHamiltonAlgebra(omega, tuple(fields), tuple(hams), structure, central)


def is_hamiltonian_system(op, omega: SymplecticForm, bounds: Bounds | None = None, basis_hint=None):
    """Classify ``op`` and build the Lie-Hamilton algebra of its Vessiot-Guldberg basis."""
    from .stratonovich import classify_stochastic_lie

    cls = classify_stochastic_lie(op, bounds, basis_hint)
    if not cls.is_lie:
        return NotHamiltonian(f"not a stochastic Lie system ({cls.reason})")
    return lie_hamilton_algebra(cls.algebra.basis, omega, cls.algebra)


@dataclass(frozen=True)
class ConservedQuantities:
    basis: tuple
    degenerate: bool = False

    def to_json(self):
        return {"basis": [str(p) for p in self.basis], "degenerate": self.degenerate}


def conserved_search(hams: Sequence, omega: SymplecticForm, max_degree: int = 2) -> ConservedQuantities:
    """Polynomials f (no constant term) with {h, f} = 0 for every h."""
    hams = list(hams)
    if not hams:
        # every function commutes with nothing; report the monomial basis
        from .polyalg import monomials_up_to

        monos = monomials_up_to(omega.chart, max_degree, 1)
        return ConservedQuantities(tuple(Polynomial(omega.chart, {e: 1}) for e in monos), degenerate=True)
    fields = [omega.hamiltonian_field(h) for h in hams]
    return ConservedQuantities(tuple(first_integrals_poly(fields, max_degree)))


# ---------------------------------------------------------------------------
# Casimirs and coalgebra constants


@dataclass(frozen=True)
class CasimirElement:
    """Polynomial in the linear coordinates v1..vr of the algebra dual."""

    poly: Polynomial

    @classmethod
    def parse(cls, text: str, r: int) -> "CasimirElement":
        return cls(parse_polynomial(text, tuple(f"v{i}" for i in range(1, r + 1))))

    @property
    def generators(self) -> tuple:
        return self.poly.variables


def _structure_lookup(structure, a, b, r):
    if a == b:
        return (Fraction(0),) * r
    if (a, b) in structure:
        return structure[(a, b)]
    if (b, a) in structure:
        return tuple(-x for x in structure[(b, a)])
    return (Fraction(0),) * r


def casimir_verify(structure: dict, C: CasimirElement):
    """Check {v_a, C} = 0 in the symmetric algebra; returns (ok, witness).

    ``structure[(a, b)]`` (a < b, 0-based) gives the coefficients of
    {v_a, v_b} over v_0..v_{r-1}.  The witness is (a, {v_a, C}) for the
    first failing generator, or None.
    """
    vs = C.generators
    r = len(vs)
    V = [Polynomial.variable(v, vs) for v in vs]
    dC = [C.poly.derive(v) for v in vs]
    for a in range(r):
        total = Polynomial.constant(0, vs)
        for b in range(r):
            if dC[b].is_zero():
                continue
            row = _structure_lookup(structure, a, b, r)
            lin = Polynomial.constant(0, vs)
            for g, c in enumerate(row):
                if c:
                    lin = lin + V[g] * c
            total = total + lin * dC[b]
        if not total.is_zero():
            return False, (a, total)
    return True, None


@dataclass(frozen=True)
class CoalgebraConstant:
    function: RationalFunction
    k: int
    verified: bool
    failures: tuple = ()

    def to_json(self):
        return {"k": self.k, "function": str(self.function), "verified": self.verified, "failures": list(self.failures)}


def coalgebra_constant(C: CasimirElement, algebra: LieHamiltonAlgebra, k: int) -> CoalgebraConstant:
    """F = C(sum_a h_1(x_(a)), ..., sum_a h_r(x_(a))), checked against the prolonged fields."""
    if k < 1:
        raise ValueError("k must be at least 1")
    gens = algebra.generators
    if len(gens) != len(C.generators):
        raise ValueError(f"Casimir has {len(C.generators)} generators, algebra has {len(gens)}")
    if any(not h.is_rational() for h in gens):
        raise ValueError("coalgebra constants need rational Hamiltonians")
    ok, witness = casimir_verify(algebra.structure, C)
    if not ok:
        raise ValueError(f"not a Casimir: {{v{witness[0] + 1}, C}} = {witness[1]}")
    chart = algebra.omega.chart
    pchart = prolonged_chart(chart, k, 1)
    images = {}
    for v, h in zip(C.generators, gens):
        total = RationalFunction.constant(0, pchart)
        for a in range(1, k + 1):
            total = total + h.rational.rename({x: copy_name(x, a) for x in chart}).embed(pchart)
        images[v] = total
    F = RationalFunction.coerce(C.poly.subs(images)).embed(pchart)
    failures = []
    for idx, X in enumerate(algebra.fields):
        if not diagonal_prolong(X, k, start=1).apply(F).is_zero():
            failures.append(idx)
    return CoalgebraConstant(F, k, not failures, tuple(failures))


def sl2_casimir() -> CasimirElement:
    """v1*v3 - v2^2 for {v1,v2}=v1, {v1,v3}=2v2, {v2,v3}=v3."""
    return CasimirElement.parse("v1*v3 - v2^2", 3)


def oscillator_casimir(n: int) -> CasimirElement:
    """Casimir of the centrally extended oscillator algebra (h1, h2, h3, 1) on R^(2n)."""
    return CasimirElement.parse(f"v2^2 + v3^2 - {2 * n}*v1*v4", 4)
