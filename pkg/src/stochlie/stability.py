"""Equilibria, the Dirichlet criterion, symmetries and relative equilibria."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PoleError
from .hamiltonian import HamiltonianFunction, SymplecticForm
from .polyalg import Polynomial, RationalFunction, as_fraction
from .sde_sim import compile_functions
from .stratonovich import StochOperator
from .vecfield import VectorField

__all__ = [
    "constituent_fields",
    "EquilibriumReport",
    "check_equilibrium",
    "EquilibriumSearch",
    "find_equilibria",
    "DirichletVerdict",
    "dirichlet_check",
    "symmetry_check",
    "MomentumMapSpec",
    "RelativeEquilibrium",
    "relative_equilibrium_solve",
]

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100


def constituent_fields(op: StochOperator):
    """[(label, W)] for every t-power field of every component."""
    out = []
    for j, comp in enumerate(op.components()):
        name = "drift" if j == 0 else f"noise{j}"
        for k, f in comp.by_power().items():
            out.append((f"{name}" + (f"*t^{k}" if k else ""), f))
    return out


def _is_exact(point) -> bool:
    return all(not isinstance(x, float) and not isinstance(x, np.floating) for x in point)


@dataclass(frozen=True)
class EquilibriumReport:
    point: tuple
    residuals: dict
    is_equilibrium: bool
    witness: str | None = None

    def to_json(self):
        return {
            "point": [str(x) if isinstance(x, Fraction) else float(x) for x in self.point],
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "equilibrium": self.is_equilibrium,
            "witness": self.witness,
        }


def check_equilibrium(op: StochOperator, point, tol: float = 1e-9) -> EquilibriumReport:
    """Every constituent field (drift and noise, each t-power) must vanish."""
    if len(point) != op.dim:
        raise ValueError(f"point has {len(point)} entries, chart has {op.dim}")
    exact = _is_exact(point)
    pt = tuple(as_fraction(x) for x in point) if exact else tuple(float(x) for x in point)
    residuals = {}
    witness = None
    worst = 0.0
    for label, W in constituent_fields(op):
        vals = W.evaluate(pt)
        r = max(abs(float(v)) for v in vals)
        residuals[label] = r
        nonzero = any(v != 0 for v in vals) if exact else r > tol
        if nonzero and (witness is None or r > worst):
            witness, worst = label, r
    return EquilibriumReport(pt, residuals, witness is None, witness)


@dataclass(frozen=True)
class EquilibriumSearch:
    equilibria: tuple
    abandoned: tuple = ()
    degenerate: bool = False

    def to_json(self):
        return {
            "equilibria": [e.to_json() for e in self.equilibria],
            "abandoned": [{"start": list(map(float, s)), "reason": r} for s, r in self.abandoned],
            "degenerate": self.degenerate,
        }


def _stacked(op: StochOperator):
    fields = [f for _, f in constituent_fields(op)]
    funcs = [c for f in fields for c in f.coeffs]
    jac = [c.derive(v) for c in funcs for v in op.chart]
    return funcs, compile_functions(op.chart, funcs), compile_functions(op.chart, jac)


def _vec(vals, shape=None):
    arr = np.array([float(v) if np.ndim(v) == 0 else v for v in vals], dtype=float)
    return arr if shape is None else arr.reshape(shape)


def find_equilibria(op: StochOperator, starts: Sequence, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER) -> EquilibriumSearch:
    """Gauss-Newton on the stacked constituent fields from each start."""
    funcs, F, J = _stacked(op)
    n = op.dim
    if not funcs or all(f.is_zero() for f in funcs):
        eqs = tuple(check_equilibrium(op, tuple(float(x) for x in s)) for s in starts)
        return EquilibriumSearch(eqs, (), True)
    found, abandoned = [], []
    for s in starts:
        x = np.array([float(v) for v in s])
        ok = False
        try:
            for _ in range(max_iter):
                r = _vec(F(*x))
                if np.max(np.abs(r)) < tol:
                    ok = True
                    break
                Jm = _vec(J(*x), (len(funcs), n))
                if np.linalg.matrix_rank(Jm) < n:
                    abandoned.append((tuple(s), "singular Jacobian"))
                    break
                step, *_ = np.linalg.lstsq(Jm, -r, rcond=None)
                x = x + step
            else:
                abandoned.append((tuple(s), "no convergence"))
        except PoleError as exc:
            abandoned.append((tuple(s), f"pole: {exc}"))
            continue
        if ok:
            found.append(x)
    found.sort(key=lambda v: tuple(np.round(v, 12)))
    unique = []
    for x in found:
        if all(np.max(np.abs(x - y)) >= 10 * tol for y in unique):
            unique.append(x)
    reports = tuple(check_equilibrium(op, tuple(x), tol=max(tol * 10, 1e-9)) for x in unique)
    return EquilibriumSearch(tuple(r for r in reports if r.is_equilibrium), tuple(abandoned))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletVerdict:
    equilibrium: bool
    conserved: str  # "strong" | "no"
    critical: bool
    hessian: str  # positive-definite | negative-definite | indefinite | degenerate
    conclusion: str
    witness: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.conclusion == "almost surely stable"

    def to_json(self):
        return {
            "equilibrium": self.equilibrium,
            "conserved": self.conserved,
            "strongly_conserved": self.conserved == "strong",
            "critical": self.critical,
            "hessian": self.hessian,
            "definite": self.hessian in ("positive-definite", "negative-definite"),
            "conclusion": self.conclusion,
            "almost_surely_stable": self.stable,
            "witness": self.witness,
        }


def _minors(H):
    out = []
    for k in range(1, len(H) + 1):
        sub = [row[:k] for row in H[:k]]
        out.append(_det(sub))
    return out


def _det(M):
    M = [list(r) for r in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


def _classify_hessian(H, exact: bool, tol: float) -> str:
    if exact:
        m = _minors(H)
        if all(x > 0 for x in m):
            return "positive-definite"
        if all((x < 0 if k % 2 == 0 else x > 0) for k, x in enumerate(m)):
            return "negative-definite"
        if m[-1] == 0:
            return "degenerate"
    ev = np.linalg.eigvalsh(np.array(H, dtype=float))
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.any(np.abs(ev) < tol * scale):
        return "degenerate"
    if np.all(ev > 0):
        return "positive-definite"
    if np.all(ev < 0):
        return "negative-definite"
    return "indefinite"


def dirichlet_check(op: StochOperator, f, z0, tol: float = 1e-9) -> DirichletVerdict:
    """Strong conservation + critical point + definite Hessian => almost surely stable."""
    chart = op.chart
    if isinstance(f, str):
        f = RationalFunction.parse(f, chart)
    f = RationalFunction.coerce(f, chart).embed(chart)
    exact = _is_exact(z0)
    pt = {v: (as_fraction(x) if exact else float(x)) for v, x in zip(chart, z0)}
    witness = {}

    eq = check_equilibrium(op, tuple(pt.values()), tol)
    if not eq.is_equilibrium:
        witness["equilibrium"] = eq.witness

    conserved = "strong"
    for label, W in constituent_fields(op):
        d = W.apply(f)
        if not d.is_zero():
            conserved = "no"
            witness["conserved"] = f"{label}(f) = {d}"
            break

    grad = [f.derive(v) for v in chart]
    gvals = [g.evaluate(pt) for g in grad]
    critical = all(g == 0 for g in gvals) if exact else max(abs(float(g)) for g in gvals) < tol
    if not critical:
        witness["critical"] = [str(g) if exact else float(g) for g in gvals]

    H = [[g.derive(v).evaluate(pt) for v in chart] for g in grad]
    hessian = _classify_hessian(H, exact, tol)

    if not eq.is_equilibrium:
        conclusion = "not an equilibrium"
    elif conserved == "strong" and critical and hessian in ("positive-definite", "negative-definite"):
        conclusion = "almost surely stable"
    else:
        conclusion = "criterion inapplicable"
    return DirichletVerdict(eq.is_equilibrium, conserved, critical, hessian, conclusion, witness)


def symmetry_check(phi: Sequence[Sequence], op: StochOperator):
    """Check phi . W(x) = W(phi x) for every constituent field W; returns (ok, witness)."""
    n = op.dim
    P = [[as_fraction(x) for x in row] for row in phi]
    if len(P) != n or any(len(r) != n for r in P):
        raise ValueError(f"phi must be {n}x{n}")
    if _det(P) == 0:
        raise ValueError("phi is not invertible")
    X = [Polynomial.variable(v, op.chart) for v in op.chart]
    images = {}
    for i, v in enumerate(op.chart):
        acc = Polynomial.constant(0, op.chart)
        for j in range(n):
            if P[i][j]:
                acc = acc + X[j] * P[i][j]
        images[v] = RationalFunction.coerce(acc)
    for label, W in constituent_fields(op):
        moved = [c.subs(images) for c in W.coeffs]
        for i in range(n):
            lhs = RationalFunction.constant(0, op.chart)
            for j in range(n):
                if P[i][j]:
                    lhs = lhs + W.coeffs[j] * P[i][j]
            if not (lhs == moved[i]):
                return False, {"field": label, "component": op.chart[i], "residual": str(lhs - moved[i])}
    return True, None


# ---------------------------------------------------------------------------
# relative equilibria


@dataclass
class MomentumMapSpec:
    """Fundamental fields xi^a_M and momentum components J_a with i_{xi^a} omega = dJ_a."""

    omega: SymplecticForm
    generators: tuple
    components: tuple
    verified: bool = False

    def __post_init__(self):
        chart = self.omega.chart
        self.components = tuple(
            HamiltonianFunction.of(RationalFunction.parse(c, chart) if isinstance(c, str) else c, chart) for c in self.components
        )
        self.generators = tuple(self.generators)
        if len(self.generators) != len(self.components):
            raise ValueError("one momentum component per generator")
        for a, (xi, Jc) in enumerate(zip(self.generators, self.components)):
            if not (self.omega.hamiltonian_field(Jc) == xi):
                raise ValueError(f"generator {a} is not the Hamiltonian field of J_{a + 1}")
        self.verified = True

    def evaluate(self, point):
        pt = dict(zip(self.omega.chart, point))
        return np.array([float(Jc.evaluate(pt)) for Jc in self.components])


@dataclass(frozen=True)
class RelativeEquilibrium:
    converged: bool
    point: tuple = ()
    xi: tuple = ()
    mu: tuple = ()
    residual: float = float("nan")
    iterations: int = 0
    message: str = ""

    def to_json(self):
        return {
            "converged": self.converged,
            "point": list(self.point),
            "xi": [list(r) for r in self.xi],
            "mu": list(self.mu),
            "relequ_residual": self.residual,
            "iterations": self.iterations,
            "message": self.message,
        }


def relative_equilibrium_solve(hams: Sequence, mm: MomentumMapSpec, guess_point, guess_xi, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER) -> RelativeEquilibrium:
    """Solve grad(h^alpha - <J, xi^alpha>) = 0 for (Gamma, xi) by min-norm Gauss-Newton.

    ``hams[alpha]`` is the Hamiltonian of operator component alpha;
    ``guess_xi`` has one row of r weights per component.
    """
    omega = mm.omega
    chart = omega.chart
    n, r, L = len(chart), len(mm.components), len(hams)
    hams = [HamiltonianFunction.of(RationalFunction.parse(h, chart) if isinstance(h, str) else h, chart) for h in hams]
    xi0 = np.array(guess_xi, dtype=float).reshape(L, r)
    gh = [h.gradient() for h in hams]
    gJ = [Jc.gradient() for Jc in mm.components]
    grad_fn = compile_functions(chart, [g for row in gh + gJ for g in row])
    hess_fn = compile_functions(chart, [g.derive(v) for row in gh + gJ for g in row for v in chart])

    def pieces(x):
        G = _vec(grad_fn(*x), (L + r, n))
        Hs = _vec(hess_fn(*x), (L + r, n, n))
        return G[:L], G[L:], Hs[:L], Hs[L:]

    x = np.array(guess_point, dtype=float)
    xi = xi0.copy()
    it = 0
    for it in range(1, max_iter + 1):
        Gh, GJ, Hh, HJ = pieces(x)
        F = np.concatenate([Gh[a] - xi[a] @ GJ for a in range(L)])
        if np.max(np.abs(F)) < tol:
            break
        Jac = np.zeros((L * n, n + L * r))
        for a in range(L):
            Jac[a * n:(a + 1) * n, :n] = Hh[a] - np.tensordot(xi[a], HJ, axes=1)
            Jac[a * n:(a + 1) * n, n + a * r:n + (a + 1) * r] = -GJ.T
        if not np.all(np.isfinite(Jac)) or np.linalg.matrix_rank(Jac) == 0:
            return RelativeEquilibrium(False, message="singular Newton system", iterations=it)
        step, *_ = np.linalg.lstsq(Jac, -F, rcond=None)
        x = x + step[:n]
        xi = xi + step[n:].reshape(L, r)
    else:
        return RelativeEquilibrium(False, tuple(x), tuple(map(tuple, xi)), message="no convergence", iterations=max_iter)

    # defining property: X_{h^alpha}(Gamma_e) = sum_a xi^{alpha,a} xi^a_M(Gamma_e)
    pt = tuple(float(v) for v in x)
    worst = 0.0
    for a, h in enumerate(hams):
        Xh = np.array(omega.hamiltonian_field(h).evaluate(pt), dtype=float)
        comb = sum(xi[a, b] * np.array(mm.generators[b].evaluate(pt), dtype=float) for b in range(r))
        worst = max(worst, float(np.max(np.abs(Xh - comb))))
    mu = tuple(float(v) for v in mm.evaluate(pt))
    ok = worst < max(tol * 100, 1e-8)
    return RelativeEquilibrium(
        ok,
        pt,
        tuple(tuple(float(v) for v in row) for row in xi),
        mu,
        worst,
        it,
        "" if ok else "inconsistent critical point: RelEquH residual too large",
    )
