"""Catalog of worked stochastic Lie systems with their auxiliary structures.

Each entry is stored in the JSON model-file grammar (see :mod:`modelfile`),
so exporting an entry and loading it back gives the same operator.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Mapping

from .hamiltonian import SymplecticForm
from .modelfile import normalize_params, operator_from_dict, param_table
from .polyalg import RationalFunction
from .stratonovich import StochOperator
from .vecfield import VectorField

__all__ = ["CatalogEntry", "get", "list_entries", "ids", "export", "oscillator_rn_model"]


def _term(coeffs, t_poly="1"):
    return {"t_poly": t_poly, "field": {"coeffs": list(coeffs)}}


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    model: dict  # model-file dict, params already merged with overrides
    provenance: str
    operator: StochOperator
    params: dict
    symplectic: dict | None = None  # {"pairs": [[q, p], ...], "factor": expr}
    rule: str | None = None
    conserved: tuple = ()
    basis_hint: tuple | None = None  # tuple of coefficient lists
    labels: tuple = ()
    foliated: dict | None = None  # {"fields": [...], "coefficients": [[...], ...]}
    momentum: dict | None = None  # {"generators": [...], "components": [...], "hamiltonians": [...], "guess": ...}
    casimir: dict | None = None  # {"text": polynomial in v1..vr}
    no_symplectic: bool = False
    expected: dict = field(default_factory=dict)

    @property
    def chart(self) -> tuple:
        return self.operator.chart

    def constants(self) -> dict:
        return param_table(self.params)

    def parse(self, text: str, variables=None) -> RationalFunction:
        return RationalFunction.parse(text, variables or self.chart, self.constants())

    def omega(self) -> SymplecticForm | None:
        if self.symplectic is None:
            return None
        factor = self.parse(self.symplectic.get("factor", "1"))
        return SymplecticForm.from_pairs(self.chart, [tuple(p) for p in self.symplectic["pairs"]], factor)

    def hint_fields(self) -> list | None:
        if self.basis_hint is None:
            return None
        return [VectorField(self.chart, [self.parse(c) for c in coeffs]) for coeffs in self.basis_hint]

    def summary(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "vars": list(self.chart),
            "interpretation": self.operator.interpretation,
            "noises": self.operator.ell - 1,
            "params": {k: str(v) for k, v in sorted(self.params.items())},
            "provenance": self.provenance,
            "attachments": [
                name
                for name, present in (
                    ("symplectic", self.symplectic is not None),
                    ("rule", self.rule is not None),
                    ("conserved", bool(self.conserved)),
                    ("basis_hint", self.basis_hint is not None),
                    ("foliated", self.foliated is not None),
                    ("momentum", self.momentum is not None),
                    ("casimir", self.casimir is not None),
                )
                if present
            ],
            "no_symplectic": self.no_symplectic,
        }


GL2 = (("x", "0"), ("y", "0"), ("0", "x"), ("0", "y"))
GL2_LABELS = ("X11", "X12", "X21", "X22")


def oscillator_rn_model(n: int) -> dict:
    """Isotropic oscillator on R^{2n}: drift omega*X1, noise -sigma*X3."""
    if n < 1:
        raise ValueError("n must be positive")
    chart = [v for i in range(1, n + 1) for v in (f"x{i}", f"y{i}")]
    drift = [f"omega*y{i}" if v.startswith("x") else f"-omega*x{i}" for i in range(1, n + 1) for v in ("x", "y")]
    noise = ["0" if v.startswith("x") else "-sigma" for v in chart]
    return {
        "vars": chart,
        "interpretation": "stratonovich",
        "drift": [_term(drift)],
        "noises": [[_term(noise)]],
        "params": {"omega": "1", "sigma": "1/2"},
    }


_SIS_STRAT_DRIFT = [
    _term(["5*I - I^2/2"]),
    _term(["-I^3 + 150*I^2 - 5000*I"], "sigma0^2 + 2*sigma0*sigma1*t + sigma1^2*t^2"),
]
_SIS_NOISE = [_term(["100*I - I^2"], "sigma0 + sigma1*t")]

_RAW = {
    "sis-ito": dict(
        title="SIS model, Ito form, general parameters",
        provenance="Ito SIS population model; defaults follow the N=100 instance with gamma=44, mu=1 (the split is arbitrary).",
        model={
            "vars": ["I"],
            "interpretation": "ito",
            "drift": [_term(["I*(beta*N - mu - gamma - beta*I)"])],
            "noises": [[_term(["I*(N - I)"], "sigma")]],
            "params": {"beta": "1/2", "N": "100", "gamma": "44", "mu": "1", "sigma": "1/100"},
        },
    ),
    "sis-ito-100": dict(
        title="SIS model, Ito form, N=100, sigma(t)=sigma0+sigma1*t",
        provenance="Ito SIS instance with drift I(5-I/2) and time-dependent noise intensity; defaults give sigma(t)=t.",
        model={
            "vars": ["I"],
            "interpretation": "ito",
            "drift": [_term(["I*(5 - I/2)"])],
            "noises": [_SIS_NOISE],
            "params": {"sigma0": "0", "sigma1": "1"},
        },
        expected={"converted_verdict": "NotWithinBounds"},
    ),
    "sis-strat": dict(
        title="SIS model, Stratonovich form of sis-ito-100",
        provenance="Stratonovich counterpart of sis-ito-100 with the cubic term -sigma^2 I^3; not a stochastic Lie system for non-constant sigma.",
        model={
            "vars": ["I"],
            "interpretation": "stratonovich",
            "drift": _SIS_STRAT_DRIFT,
            "noises": [_SIS_NOISE],
            "params": {"sigma0": "0", "sigma1": "1"},
        },
        expected={"verdict": "NotWithinBounds", "reason": "closure degree bound"},
    ),
    "oscillator-white-noise": dict(
        title="Damped harmonic oscillator with multiplicative white noise",
        provenance="Linear damped oscillator; drift omega(X12-X21)-k X22 and noise -sigma X22 in the gl(2) basis.",
        model={
            "vars": ["x", "y"],
            "interpretation": "stratonovich",
            "drift": [_term(["omega*y", "-omega*x - k*y"])],
            "noises": [[_term(["0", "-sigma*y"])]],
            "params": {"omega": "1", "k": "1/2", "sigma": "1/2"},
        },
        rule="linear2",
        basis_hint=GL2,
        labels=GL2_LABELS,
        conserved=("(x^2+y^2)/2",),
        expected={"verdict": "StochasticLie", "dim": 4},
    ),
    "satellite": dict(
        title="Satellite in a circular orbit with fluctuating atmospheric density",
        provenance="Linearised satellite equation, Ito form; drift X12+(2C-D)X21-B X22, noise -AD X21-AB X22.",
        model={
            "vars": ["Y", "dY"],
            "interpretation": "ito",
            "drift": [_term(["dY", "(2*C - D)*Y - B*dY"])],
            "noises": [[_term(["0", "-A*D*Y - A*B*dY"])]],
            "params": {"A": "1/2", "B": "1", "C": "1/2", "D": "2"},
        },
        rule="linear2",
        basis_hint=(("Y", "0"), ("dY", "0"), ("0", "Y"), ("0", "dY")),
        labels=GL2_LABELS,
        expected={"converted_verdict": "StochasticLie", "dim": 4},
    ),
    "riccati": dict(
        title="Noise-free stochastic Riccati equation",
        provenance="Riccati drift and noise, quadratic in the state with polynomial time weights.",
        model={
            "vars": ["x"],
            "interpretation": "stratonovich",
            "drift": [_term(["b0"]), _term(["x"], "b1*t"), _term(["b2*x^2"])],
            "noises": [[_term(["c0"]), _term(["x^2"], "c2*t")]],
            "params": {"b0": "1", "b1": "1", "b2": "-1", "c0": "1/2", "c2": "1/2"},
        },
        basis_hint=(("1",), ("x",), ("x^2",)),
        labels=("Y1", "Y2", "Y3"),
        expected={"verdict": "StochasticLie", "dim": 3},
    ),
    "sis-hamiltonian": dict(
        title="Hamiltonian stochastic SIS model",
        provenance="SIS-type system rho0(t,B) Y1 + Y2 with rho0 = rho + sigma dB/dt; Hamiltonian for dq^dp.",
        model={
            "vars": ["q", "p"],
            "interpretation": "stratonovich",
            "drift": [_term(["rho*q - q^2 - 1/p^2", "-rho*p + 2*p*q"])],
            "noises": [[_term(["sigma*q", "-sigma*p"])]],
            "params": {"rho": "1", "sigma": "1/2"},
        },
        symplectic={"pairs": [["q", "p"]], "factor": "1"},
        basis_hint=(("q", "-p"), ("-(q^2 + 1/p^2)", "2*q*p")),
        labels=("Y1", "Y2"),
        expected={"verdict": "StochasticLie", "dim": 2, "hamiltonian": True},
    ),
    "lotka-volterra": dict(
        title="Stochastic Lotka-Volterra system, symmetric single-noise case",
        provenance="Lotka-Volterra with b1=b2=b, a1=a2=a and one shared noise, so that the operator lies in span{X1, X2}.",
        model={
            "vars": ["N1", "N2"],
            "interpretation": "stratonovich",
            "drift": [_term(["b*N1 - a*N1*N2", "b*N2 - a*N1*N2"])],
            "noises": [[_term(["sigma*N1", "sigma*N2"])]],
            "params": {"a": "1", "b": "1", "sigma": "1/2"},
        },
        symplectic={"pairs": [["N1", "N2"]], "factor": "1/(N1*N2)"},
        basis_hint=(("N1", "N2"), ("N1*N2", "N1*N2")),
        labels=("X1", "X2"),
        expected={"verdict": "StochasticLie", "dim": 2, "hamiltonian": True, "interior_point": ["b/a", "b/a"]},
    ),
    "lotka-volterra-general": dict(
        title="Stochastic Lotka-Volterra system with two independent noises",
        provenance="General Lotka-Volterra model, Ito form, one noise per species.",
        model={
            "vars": ["N1", "N2"],
            "interpretation": "ito",
            "drift": [_term(["(b1 - a1*N2)*N1", "(b2 - a2*N1)*N2"])],
            "noises": [[_term(["sigma1*N1", "0"])], [_term(["0", "sigma2*N2"])]],
            "params": {"a1": "1", "a2": "1", "b1": "1", "b2": "2", "sigma1": "1/2", "sigma2": "1/4"},
        },
        expected={"interior_point": ["b2/a2", "b1/a1"]},
    ),
    "oscillator-rn": dict(
        title="Isotropic oscillator on R^4 (n=2) with translation noise",
        provenance="Oscillator on T*R^n with drift omega X1 and noise -sigma X3; Hamiltonian for sum dx_i^dy_i with a centrally extended Heisenberg algebra.",
        model=oscillator_rn_model(2),
        symplectic={"pairs": [["x1", "y1"], ["x2", "y2"]], "factor": "1"},
        basis_hint=(("y1", "-x1", "y2", "-x2"), ("1", "0", "1", "0"), ("0", "1", "0", "1")),
        labels=("X1", "X2", "X3"),
        casimir={"text": "v2^2 + v3^2 - 4*v1*v4"},
        expected={"verdict": "StochasticLie", "dim": 3, "hamiltonian": True},
    ),
    "jacobi-sis": dict(
        title="SIS model on (S, I) as a foliated system",
        provenance="Two-compartment SIS model in component form; the fields Xb1, Xb2 close [Xb1, Xb2]=Xb2 with weights depending on S+I. Jacobi structure not modelled.",
        model={
            "vars": ["S", "I"],
            "interpretation": "stratonovich",
            "drift": [_term(["-beta*S*I + (gamma + mu)*I", "beta*S*I - (gamma + mu)*I"])],
            "noises": [[_term(["-sigma*S*I", "sigma*S*I"])]],
            "params": {"beta": "1/2", "gamma": "1/4", "mu": "1/4", "sigma": "1/10"},
        },
        foliated={
            "fields": [["-S*I/(S+I)", "S*I/(S+I)"], ["I - S*I/(S+I)", "-(I - S*I/(S+I))"]],
            "coefficients": [["beta*(S+I) - (gamma + mu)", "gamma + mu"], ["sigma*(S+I)", "0"]],
        },
        no_symplectic=True,
        expected={"foliated": True},
    ),
    "gbm": dict(
        title="Geometric Brownian motion",
        provenance="dX = aX dt + bX dB in Ito form; exact solution available for convergence tests.",
        model={
            "vars": ["X"],
            "interpretation": "ito",
            "drift": [_term(["a*X"])],
            "noises": [[_term(["b*X"])]],
            "params": {"a": "1", "b": "1/2"},
        },
        rule="linear1",
        expected={"converted_verdict": "StochasticLie", "dim": 1},
    ),
    "sl2-symplectic": dict(
        title="sl(2) realisation by quadratic Hamiltonians on the plane",
        provenance="Fields of p^2/2, -qp/2, q^2/2 for dq^dp; drift h1+h3, noise sigma*h2.",
        model={
            "vars": ["q", "p"],
            "interpretation": "stratonovich",
            "drift": [_term(["p", "-q"])],
            "noises": [[_term(["-sigma*q/2", "sigma*p/2"])]],
            "params": {"sigma": "1/2"},
        },
        symplectic={"pairs": [["q", "p"]], "factor": "1"},
        basis_hint=(("p", "0"), ("-q/2", "p/2"), ("0", "-q")),
        labels=("X1", "X2", "X3"),
        casimir={"text": "v1*v3 - v2^2"},
        expected={"verdict": "StochasticLie", "dim": 3, "hamiltonian": True},
    ),
    "rotation": dict(
        title="Planar rotation driven by time and noise, with SO(2) symmetry",
        provenance="Components omega*X_h and sigma*X_J with h = J = (x^2+y^2)/2 for dx^dy.",
        model={
            "vars": ["x", "y"],
            "interpretation": "stratonovich",
            "drift": [_term(["omega*y", "-omega*x"])],
            "noises": [[_term(["sigma*y", "-sigma*x"])]],
            "params": {"omega": "1", "sigma": "1"},
        },
        symplectic={"pairs": [["x", "y"]], "factor": "1"},
        conserved=("(x^2+y^2)/2",),
        momentum={
            "generators": [["y", "-x"]],
            "components": ["(x^2+y^2)/2"],
            "hamiltonians": ["omega*(x^2+y^2)/2", "sigma*(x^2+y^2)/2"],
            "guess_point": ["1", "0"],
            "guess_xi": [["1/2"], ["1/2"]],
        },
        expected={"verdict": "StochasticLie", "dim": 1, "xi": [[1], [1]]},
    ),
}


def ids() -> list:
    return list(_RAW)


def get(entry_id: str, overrides: Mapping | None = None) -> CatalogEntry:
    """Catalog entry with ``overrides`` substituted into its parameters."""
    if entry_id not in _RAW:
        raise KeyError(f"unknown catalog id {entry_id!r}; known: {', '.join(_RAW)}")
    raw = _RAW[entry_id]
    model = copy.deepcopy(raw["model"])
    model["name"] = entry_id
    op = operator_from_dict(model, overrides)
    params = normalize_params(model.get("params"))
    if overrides:
        params.update(normalize_params(overrides))
    model["params"] = {k: str(v) for k, v in params.items()}
    extra = {k: v for k, v in raw.items() if k not in ("model",)}
    for key in ("basis_hint", "labels", "conserved"):
        if key in extra and extra[key] is not None:
            extra[key] = tuple(extra[key])
    return CatalogEntry(id=entry_id, model=model, operator=op, params=params, **extra)


def list_entries() -> list:
    return [get(i).summary() for i in _RAW]


def export(entry_id: str, overrides: Mapping | None = None) -> dict:
    """The entry as a model-file dict (exact parameters as strings)."""
    return copy.deepcopy(get(entry_id, overrides).model)

