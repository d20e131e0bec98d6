"""Exact sparse multivariate polynomials and rational functions over Q.

Everything here is exact: coefficients are :class:`fractions.Fraction`, and
no floating point value is ever accepted as a coefficient.  Terms are stored
as a mapping from exponent tuples (aligned with ``variables``) to nonzero
coefficients.  Printing and "leading term" use the graded lexicographic order
over the declared variable order.

Values are immutable; binary operations between objects declared over
different variable lists work over the ordered union of the two lists.

Multivariate gcd (needed to put rational functions in lowest terms) is
delegated to sympy's sparse polynomial rings; everything else is in-house.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, PoleError, UnknownVariableError

__all__ = [
    "Polynomial",
    "RationalFunction",
    "LinearSolution",
    "as_fraction",
    "parse_polynomial",
    "parse_rational",
    "derive",
    "rref",
    "rank",
    "nullspace",
    "solve_linear_over_Q",
    "monomials_up_to",
    "solve_linear_rf",
]

TIME = "t"


def as_fraction(value) -> Fraction:
    """Coerce an exact scalar (int, Fraction, Rational, "p/q" string) to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        try:
            return Fraction(value.strip().replace("−", "-"))
        except ValueError:
            raise ValueError(f"not an exact rational: {value!r}") from None
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"not an exact rational: {value!r} ({type(value).__name__})")


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _grlex_key(exps):
    return (sum(exps), exps)


def _reindex(terms, old_vars, new_vars):
    if old_vars == new_vars:
        return terms
    pos = [new_vars.index(v) for v in old_vars]
    n = len(new_vars)
    out = {}
    for exps, c in terms.items():
        e = [0] * n
        for p, k in zip(pos, exps):
            e[p] = k
        out[tuple(e)] = c
    return out


def _union(a: tuple, b: tuple) -> tuple:
    if a == b:
        return a
    return a + tuple(v for v in b if v not in a)


class Polynomial:
    """Sparse polynomial with exact rational coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str] = (), terms: Mapping | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variables in {variables}")
        n = len(variables)
        clean: dict = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} does not match variables {variables}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent in polynomial")
            c = as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        self.variables = variables
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def _make(cls, variables, terms):
        obj = object.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        return obj

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, value, variables: Iterable[str] = ()) -> "Polynomial":
        variables = tuple(variables)
        c = as_fraction(value)
        return cls._make(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def variable(cls, name: str, variables: Iterable[str] | None = None) -> "Polynomial":
        variables = (name,) if variables is None else tuple(variables)
        if name not in variables:
            raise UnknownVariableError(name, variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls._make(variables, {tuple(e): Fraction(1)})

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] | None = None, constants=None) -> "Polynomial":
        return parse_polynomial(text, variables, constants)

    # inspection -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def used_variables(self) -> tuple:
        used = set()
        for exps in self.terms:
            used.update(v for v, k in zip(self.variables, exps) if k)
        return tuple(v for v in self.variables if v in used)

    def sorted_terms(self):
        """Terms in decreasing graded-lex order."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return max(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def leading_coefficient(self) -> Fraction:
        return self.leading_term()[1]

    def named_terms(self) -> dict:
        """Variable-order independent view: frozenset((var, exp), ...) -> coeff."""
        return {
            frozenset((v, k) for v, k in zip(self.variables, e) if k): c
            for e, c in self.terms.items()
        }

    # variable handling ------------------------------------------------------

    def embed(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express over ``variables`` (must contain every used variable)."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.used_variables() if v not in variables]
        if missing:
            raise UnknownVariableError(missing[0], variables)
        keep = [(i, variables.index(v)) for i, v in enumerate(self.variables) if v in variables]
        n = len(variables)
        out = {}
        for exps, c in self.terms.items():
            e = [0] * n
            for i, j in keep:
                e[j] = exps[i]
            out[tuple(e)] = c
        return Polynomial._make(variables, out)

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        new_vars = tuple(mapping.get(v, v) for v in self.variables)
        if len(set(new_vars)) != len(new_vars):
            # two variables collapse onto one name: merge by re-embedding
            target = tuple(dict.fromkeys(new_vars))
            out: dict = {}
            for exps, c in self.terms.items():
                e = [0] * len(target)
                for v, k in zip(new_vars, exps):
                    e[target.index(v)] += k
                e = tuple(e)
                out[e] = out.get(e, 0) + c
            return Polynomial(target, out)
        return Polynomial._make(new_vars, self.terms)

    def _aligned(self, other: "Polynomial"):
        if self.variables == other.variables:
            return self.variables, self.terms, other.terms
        vs = _union(self.variables, other.variables)
        return vs, _reindex(self.terms, self.variables, vs), _reindex(other.terms, other.variables, vs)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            return Polynomial.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Polynomial._make(vs, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._make(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            c = as_fraction(other)
            if not c:
                return Polynomial._make(self.variables, {})
            return Polynomial._make(self.variables, {e: v * c for e, v in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        vs, a, b = self._aligned(other)
        out: dict = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Polynomial._make(vs, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            return self * (1 / as_fraction(other))
        if isinstance(other, Polynomial):
            return RationalFunction(self, other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = Polynomial.constant(other, self.variables)
        if isinstance(other, RationalFunction):
            return other == self
        if not isinstance(other, Polynomial):
            return NotImplemented
        _, a, b = self._aligned(other)
        return a == b

    def __hash__(self):
        return hash(frozenset(self.named_terms().items()))

    # calculus / evaluation --------------------------------------------------

    def derive(self, var: str, strict: bool = True) -> "Polynomial":
        if var not in self.variables:
            if strict:
                raise UnknownVariableError(var, self.variables)
            return Polynomial._make(self.variables, {})
        i = self.variables.index(var)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Polynomial._make(self.variables, out)

    def evaluate(self, point: Mapping):
        """Evaluate at ``point`` (a mapping over *all* declared variables).

        Exact when the point values are exact; floats are accepted and give
        a float result.
        """
        for v in self.variables:
            if v not in point:
                raise UnknownVariableError(v, tuple(point))
        vals = [point[v] for v in self.variables]
        if any(isinstance(x, float) for x in vals):
            total = 0.0
            for e, c in self.terms.items():
                term = float(c)
                for x, k in zip(vals, e):
                    if k:
                        term *= x ** k
                total += term
            return total
        vals = [as_fraction(x) for x in vals]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(vals, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def subs(self, mapping: Mapping[str, object]) -> "Polynomial | RationalFunction":
        """Substitute variables by scalars, polynomials or rational functions."""
        if not mapping:
            return self
        rational = any(isinstance(v, RationalFunction) for v in mapping.values())
        keep = tuple(v for v in self.variables if v not in mapping)
        images = {}
        for v, img in mapping.items():
            if v not in self.variables:
                continue
            if isinstance(img, (Polynomial, RationalFunction)):
                images[v] = img
            else:
                images[v] = Polynomial.constant(img)
        zero = RationalFunction.constant(0, keep) if rational else Polynomial.constant(0, keep)
        one_base = RationalFunction.constant(1, keep) if rational else Polynomial.constant(1, keep)
        powers: dict = {}

        def power(v, k):
            key = (v, k)
            if key not in powers:
                powers[key] = images[v] ** k
            return powers[key]

        keep_idx = [i for i, v in enumerate(self.variables) if v in keep]
        total = zero
        for e, c in self.terms.items():
            mono = Polynomial._make(keep, {tuple(e[i] for i in keep_idx): c})
            term = one_base * mono if rational else mono
            for i, v in enumerate(self.variables):
                if v in images and e[i]:
                    term = term * power(v, e[i])
            total = total + term
        return total

    def coefficients_in(self, var: str) -> dict:
        """Split as sum_k var^k * P_k; returns {k: P_k} (P_k free of var, same variables)."""
        if var not in self.variables:
            return {0: self} if self.terms else {}
        i = self.variables.index(var)
        out: dict = {}
        for e, c in self.terms.items():
            k = e[i]
            ne = e[:i] + (0,) + e[i + 1:]
            out.setdefault(k, {})[ne] = c
        return {k: Polynomial._make(self.variables, t) for k, t in sorted(out.items())}

    def content(self) -> Fraction:
        """Positive rational content (gcd of numerators / lcm of denominators)."""
        from math import gcd

        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    # printing ---------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            a = abs(c)
            if mono:
                body = mono if a == 1 else f"{_fmt_fraction(a)}*{mono}"
            else:
                body = _fmt_fraction(a)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"Polynomial({str(self)!r}, variables={self.variables})"


# ---------------------------------------------------------------------------
# gcd via sympy sparse rings


@lru_cache(maxsize=256)
def _sympy_ring(variables: tuple):
    from sympy import QQ
    from sympy.polys.rings import ring

    names = [f"_v{i}" for i in range(len(variables))] if variables else ["_v0"]
    R, *_ = ring(",".join(names), QQ)
    return R


def _to_ring(p: Polynomial, R, nvars):
    from sympy import QQ

    if nvars == 0:
        return R.from_dict({(0,): QQ(c.numerator, c.denominator) for e, c in p.terms.items()})
    return R.from_dict({e: QQ(c.numerator, c.denominator) for e, c in p.terms.items()})


def _from_ring(elem, variables) -> Polynomial:
    n = len(variables)
    out = {}
    for e, c in elem.items():
        out[tuple(e[:n]) if n else ()] = Fraction(int(c.numerator), int(c.denominator))
    return Polynomial._make(variables, out)


def poly_cofactors(a: Polynomial, b: Polynomial):
    """Return (g, a/g, b/g) with g = gcd(a, b) (over a common variable list)."""
    vs, ta, tb = a._aligned(b)
    a = Polynomial._make(vs, ta)
    b = Polynomial._make(vs, tb)
    R = _sympy_ring(vs)
    g, ca, cb = _to_ring(a, R, len(vs)).cofactors(_to_ring(b, R, len(vs)))
    return _from_ring(g, vs), _from_ring(ca, vs), _from_ring(cb, vs)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    return poly_cofactors(a, b)[0]


# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of polynomials, kept in lowest terms with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Polynomial):
            if isinstance(num, RationalFunction):
                if den is not None:
                    raise TypeError("give a RationalFunction or num/den, not both")
                self.num, self.den = num.num, num.den
                return
            num = Polynomial.constant(num)
        if den is None:
            den = Polynomial.constant(1, num.variables)
        elif not isinstance(den, Polynomial):
            den = Polynomial.constant(den, num.variables)
        if den.is_zero():
            raise PoleError("zero denominator in rational function")
        vs, tn, td = num._aligned(den)
        num = Polynomial._make(vs, tn)
        den = Polynomial._make(vs, td)
        self.num, self.den = _canonical(num, den)

    @classmethod
    def _make(cls, num, den):
        obj = object.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    @classmethod
    def constant(cls, value, variables: Iterable[str] = ()) -> "RationalFunction":
        variables = tuple(variables)
        return cls._make(Polynomial.constant(value, variables), Polynomial.constant(1, variables))

    @classmethod
    def variable(cls, name: str, variables: Iterable[str] | None = None) -> "RationalFunction":
        p = Polynomial.variable(name, variables)
        return cls._make(p, Polynomial.constant(1, p.variables))

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] | None = None, constants=None) -> "RationalFunction":
        return parse_rational(text, variables, constants)

    @classmethod
    def coerce(cls, value, variables: Iterable[str] = ()) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls._make(value, Polynomial.constant(1, value.variables))
        if isinstance(value, str):
            return parse_rational(value, tuple(variables))
        return cls.constant(value, variables)

    # inspection -------------------------------------------------------------

    @property
    def variables(self) -> tuple:
        return self.num.variables

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def used_variables(self) -> tuple:
        used = set(self.num.used_variables()) | set(self.den.used_variables())
        return tuple(v for v in self.variables if v in used)

    def degree(self) -> int:
        """max(deg numerator, deg denominator); used as a size measure."""
        return max(self.num.degree(), self.den.degree())

    def embed(self, variables: Sequence[str]) -> "RationalFunction":
        return RationalFunction._make(self.num.embed(variables), self.den.embed(variables))

    def rename(self, mapping: Mapping[str, str]) -> "RationalFunction":
        return RationalFunction._make(self.num.rename(mapping), self.den.rename(mapping))

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction._make(other, Polynomial.constant(1, other.variables))
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            return RationalFunction.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._make(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            c = as_fraction(other)
            return RationalFunction._make(self.num * c, self.den if c else Polynomial.constant(1, self.variables))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_polynomial() and other.is_polynomial():
            return RationalFunction._make(
                self.num * other.num, Polynomial.constant(1, _union(self.variables, other.variables))
            ) if self.den == 1 and other.den == 1 else RationalFunction(self.num * other.num, self.den * other.den)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise PoleError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("integer powers only")
        if k < 0:
            if self.is_zero():
                raise PoleError("negative power of zero")
            return RationalFunction(self.den ** (-k), self.num ** (-k))
        return RationalFunction._make(self.num ** k, self.den ** k)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        if self.is_polynomial():
            return hash(self.num * (1 / self.den.constant_value()))
        # normalise the scale independently of variable order
        den_named = self.den.named_terms()
        key = min(den_named, key=lambda m: (sum(k for _, k in m), sorted(m)))
        s = den_named[key]
        return hash((hash(self.num * (1 / s)), hash(self.den * (1 / s))))

    # calculus / evaluation --------------------------------------------------

    def derive(self, var: str, strict: bool = True) -> "RationalFunction":
        if var not in self.variables:
            if strict:
                raise UnknownVariableError(var, self.variables)
            return RationalFunction.constant(0, self.variables)
        dn = self.num.derive(var)
        if self.den.is_constant():
            return RationalFunction._make(dn, self.den)
        dd = self.den.derive(var)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping):
        for v in self.variables:
            if v not in point:
                raise UnknownVariableError(v, tuple(point))
        d = self.den.evaluate(point)
        if d == 0:
            raise PoleError(f"denominator {self.den} vanishes at {dict(point)}")
        return self.num.evaluate(point) / d

    def subs(self, mapping: Mapping[str, object]) -> "RationalFunction":
        mapping = {k: (v if isinstance(v, (Polynomial, RationalFunction)) else as_fraction(v)) for k, v in mapping.items()}
        mapping = {
            k: (RationalFunction.coerce(v) if not isinstance(v, Fraction) else RationalFunction.constant(v))
            for k, v in mapping.items()
        }
        n = self.num.subs(mapping)
        d = self.den.subs(mapping)
        return RationalFunction.coerce(n) / RationalFunction.coerce(d)

    def coefficients_in(self, var: str) -> dict:
        """For a denominator free of ``var``: {k: R_k} with self = sum var^k R_k."""
        if self.den.degree_in(var) > 0:
            raise ValueError(f"denominator of {self} depends on {var}")
        return {k: RationalFunction(p, self.den) for k, p in self.num.coefficients_in(var).items()}

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        if self.den.is_constant():
            return str(self.num * (1 / self.den.constant_value()))
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


def _canonical(num: Polynomial, den: Polynomial):
    vs = num.variables
    if num.is_zero():
        return num, Polynomial.constant(1, vs)
    if den.is_constant():
        c = den.constant_value()
        if c == 1:
            return num, den
        return num * (1 / c), Polynomial.constant(1, vs)
    _, num, den = poly_cofactors(num, den)
    lc = den.leading_coefficient()
    if lc != 1:
        num = num * (1 / lc)
        den = den * (1 / lc)
    return num, den


def canonicalize(f: RationalFunction) -> RationalFunction:
    n, d = _canonical(f.num, f.den)
    return RationalFunction._make(n, d)


def derive(f, var: str):
    """Exact partial derivative of a polynomial or rational function."""
    if isinstance(f, Polynomial):
        f = RationalFunction.coerce(f)
    return f.derive(var)


def monomials_up_to(variables: Sequence[str], max_degree: int, min_degree: int = 0):
    """Exponent tuples of total degree in [min_degree, max_degree], grlex ascending."""
    n = len(variables)
    out = []
    for d in range(min_degree, max_degree + 1):
        block = []
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            block.append(tuple(e))
        out.extend(sorted(block))
    return out


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_Ͱ-Ͽ][A-Za-z0-9_Ͱ-Ͽ]*)"
    r"|(?P<op>\*\*|[-+*/^()−·]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1
            while col <= len(text) and text[col - 1].isspace():
                col += 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", text, col)
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind) + 1
        if kind == "op":
            val = {"−": "-", "·": "*", "**": "^"}.get(val, val)
        tokens.append((kind, val, start))
        pos = m.end()
    tokens.append(("end", None, len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text, variables, constants, rational):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables) if variables is not None else None
        self.constants = {k: as_fraction(v) for k, v in (constants or {}).items()}
        self.rational = rational
        self.seen = []

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("*", "/"):
                tok = self.take()
                rhs = self.unary()
                if val == "*":
                    node = node * rhs
                else:
                    node = self.divide(node, rhs, tok)
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                node = node * self.unary()  # implicit multiplication
            else:
                return node

    def divide(self, a, b, tok):
        if isinstance(b, Fraction):
            if b == 0:
                self.error("division by zero", tok)
            return a * (1 / b) if not isinstance(a, Fraction) else a / b
        if isinstance(b, Polynomial) and b.is_constant():
            c = b.constant_value()
            if c == 0:
                self.error("division by zero", tok)
            return a * (1 / c)
        if isinstance(b, RationalFunction) and b.is_constant():
            c = b.constant_value()
            if c == 0:
                self.error("division by zero", tok)
            return a * (1 / c)
        if not self.rational:
            self.error("division by a non-constant is not allowed in a polynomial", tok)
        if isinstance(b, (RationalFunction, Polynomial)) and b.is_zero():
            self.error("division by zero", tok)
        return RationalFunction.coerce(a) / RationalFunction.coerce(b)

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            node = self.unary()
            return -node if val == "-" else node
        return self.power()

    def power(self):
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            tok = self.take()
            neg = False
            if self.peek()[1] == "-" and self.peek()[0] == "op":
                self.take()
                neg = True
            ktok = self.take()
            if ktok[0] != "num" or "." in ktok[1]:
                self.error("exponent must be an integer literal", ktok)
            k = int(ktok[1])
            if neg:
                if not self.rational and not (isinstance(base, Fraction)):
                    self.error("negative exponent in a polynomial", tok)
                if isinstance(base, Fraction):
                    if base == 0:
                        self.error("zero to a negative power", tok)
                    return base ** (-k)
                return RationalFunction.coerce(base) ** (-k)
            return base ** k
        return base

    def primary(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return Fraction(val)
        if kind == "name":
            if val in self.constants:
                return self.constants[val]
            if self.variables is not None and val not in self.variables:
                self.error(f"unknown symbol {val!r}", tok)
            if val not in self.seen:
                self.seen.append(val)
            return Polynomial.variable(val, self.variables if self.variables is not None else (val,))
        if kind == "op" and val == "(":
            node = self.expr()
            close = self.take()
            if close[1] != ")":
                self.error("expected ')'", close)
            return node
        if kind == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected token {val!r}", tok)

    def run(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return node


def _finish(node, variables):
    if isinstance(node, Fraction):
        return Polynomial.constant(node, variables or ())
    if variables is not None:
        return node.embed(variables)
    return node


def parse_polynomial(text: str, variables: Sequence[str] | None = None, constants=None) -> Polynomial:
    """Parse ``3/2*x^2*y - q*p^3``-style text.

    ``variables`` declares (and orders) the allowed symbols; names listed in
    ``constants`` are substituted by their exact values.
    """
    node = _Parser(text, variables, constants, rational=False).run()
    node = _finish(node, tuple(variables) if variables is not None else None)
    if isinstance(node, RationalFunction):
        node = node.as_polynomial()
    return node


def parse_rational(text: str, variables: Sequence[str] | None = None, constants=None) -> RationalFunction:
    node = _Parser(text, variables, constants, rational=True).run()
    vs = tuple(variables) if variables is not None else None
    node = _finish(node, vs)
    return RationalFunction.coerce(node)


# ---------------------------------------------------------------------------
# linear algebra over Q


def rref(rows: Sequence[Sequence]):
    """Reduced row-echelon form; returns (matrix, pivot_columns)."""
    m = [[as_fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    if any(len(r) != ncols for r in m):
        raise ValueError("rows of unequal length")
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        if pv != 1:
            m[r] = [x / pv for x in m[r]]
        row_r = m[r]
        nz = [j for j in range(c, ncols) if row_r[j] != 0]
        for i in range(len(m)):
            if i != r:
                f = m[i][c]
                if f != 0:
                    mi = m[i]
                    for j in nz:
                        mi[j] -= f * row_r[j]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncols: int | None = None):
    """Exact basis of {v : rows · v = 0}."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty system")
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    m, pivots = rref(rows)
    ncols = len(m[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append(tuple(v))
    return basis


@dataclass(frozen=True)
class LinearSolution:
    """Solution set ``particular + span(nullspace)`` of a consistent system."""

    particular: tuple
    nullspace: tuple

    @property
    def unique(self) -> bool:
        return not self.nullspace


def solve_linear_over_Q(rows: Sequence[Sequence], rhs: Sequence) -> LinearSolution | None:
    """Solve ``rows · x = rhs`` exactly; ``None`` means inconsistent."""
    rows = [list(r) for r in rows]
    rhs = list(rhs)
    if len(rows) != len(rhs):
        raise ValueError("rhs length does not match number of rows")
    if not rows:
        raise ValueError("empty system")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ValueError("rows of unequal length")
    aug, pivots = rref([r + [b] for r, b in zip(rows, rhs)])
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = aug[r][ncols]
    ns = nullspace([r[:ncols] for r in aug], ncols) if aug else []
    return LinearSolution(tuple(x), tuple(ns))


def solve_linear_rf(A, b):
    """Solve a square system over rational functions; None when singular."""
    n = len(A)
    M = [[RationalFunction.coerce(x) for x in row] + [RationalFunction.coerce(rhs)] for row, rhs in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if not M[r][c].is_zero()), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        if not (pv == 1):
            M[c] = [x / pv for x in M[c]]
        for r in range(n):
            if r != c and not M[r][c].is_zero():
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]
