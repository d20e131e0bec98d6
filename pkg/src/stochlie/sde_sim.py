"""Seeded Brownian paths and Euler-Maruyama / Heun integration.

Brownian increments come from a counter-based generator so that any path can
be regenerated bit for bit from ``(seed, T, N, dims)``:

* source ``s`` uses numpy's Philox-4x64 with the 128-bit key
  ``seed | (s << 64)`` and counter starting at zero;
* step ``k`` consumes the raw 64-bit outputs ``2k`` and ``2k+1``;
* each raw word ``r`` becomes ``u = ((r >> 11) + 0.5) * 2**-53`` in (0, 1);
* the normal draw is ``sqrt(-2 ln u1) * cos(2 pi u2)`` (Box-Muller, cosine
  branch only), scaled by ``sqrt(T / N)``.

Ensembles derive one seed per path from ``SeedSequence([base, index])``.

Symbolic coefficients are compiled once into numpy code; the state can carry
a trailing batch axis so whole ensembles step together.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InterpretationError, PoleError
from .polyalg import TIME, Polynomial, RationalFunction, as_fraction
from .stratonovich import ITO, STRAT, StochOperator

__all__ = [
    "write_ensemble_csv",
    "POLE_THRESHOLD",
    "BrownianPath",
    "sample_brownian",
    "sample_ensemble",
    "derive_seed",
    "compile_functions",
    "compile_operator",
    "Trajectory",
    "integrate",
    "integrate_em",
    "integrate_heun",
    "strong_order_estimate",
    "cross_scheme_slope",
    "gbm_exact",
    "write_csv",
]

POLE_THRESHOLD = 1e-12
_MASK64 = (1 << 64) - 1


def derive_seed(base: int, index: int) -> int:
    """64-bit child seed for ensemble member ``index``."""
    ss = np.random.SeedSequence([int(base) & _MASK64, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _normals(seed: int, source: int, n: int) -> np.ndarray:
    key = (int(seed) & _MASK64) | (int(source) << 64)
    bg = np.random.Philox(key=key)
    raw = bg.random_raw(2 * n)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    u1, u2 = u[0::2], u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class BrownianPath:
    """Increments on the uniform grid ``t_k = k T / N``.

    ``increments`` has shape ``(dims, N)`` or ``(dims, N, B)`` for a batch.
    """

    seed: int
    T: float
    N: int
    increments: np.ndarray = field(repr=False)

    @property
    def dims(self) -> int:
        return self.increments.shape[0]

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt

    @property
    def batch(self) -> tuple:
        return self.increments.shape[2:]

    def values(self) -> np.ndarray:
        """B(t_k), starting from 0; shape (dims, N+1, ...)."""
        z = np.zeros(self.increments.shape[:1] + (1,) + self.batch)
        return np.concatenate([z, np.cumsum(self.increments, axis=1)], axis=1)

    def terminal(self) -> np.ndarray:
        return self.increments.sum(axis=1)

    def coarsen(self, factor: int) -> "BrownianPath":
        """Sum consecutive blocks of ``factor`` increments."""
        if factor < 1 or self.N % factor:
            raise ValueError(f"factor {factor} does not divide N={self.N}")
        shape = (self.dims, self.N // factor, factor) + self.batch
        return BrownianPath(self.seed, self.T, self.N // factor, self.increments.reshape(shape).sum(axis=2))

    def select(self, columns) -> "BrownianPath":
        return BrownianPath(self.seed, self.T, self.N, self.increments[:, :, columns])


def _check_grid(T, N, dims):
    if not (T > 0):
        raise ValueError("T must be positive")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if dims < 0:
        raise ValueError("dims must be non-negative")


def sample_brownian(seed: int, T: float, N: int, dims: int) -> BrownianPath:
    _check_grid(T, N, dims)
    N = int(N)
    scale = math.sqrt(T / N)
    inc = np.empty((dims, N))
    for s in range(dims):
        inc[s] = _normals(seed, s, N) * scale
    return BrownianPath(int(seed), float(T), N, inc)


def sample_ensemble(base_seed: int, T: float, N: int, dims: int, paths: int) -> BrownianPath:
    """Batch of ``paths`` independent paths; member i is sample_brownian(derive_seed(base, i), ...)."""
    _check_grid(T, N, dims)
    N = int(N)
    inc = np.empty((dims, N, paths))
    for i in range(paths):
        inc[:, :, i] = sample_brownian(derive_seed(base_seed, i), T, N, dims).increments
    return BrownianPath(int(base_seed), float(T), N, inc)


# ---------------------------------------------------------------------------
# code generation


def _poly_code(p: Polynomial, names: Sequence[str]) -> str:
    if p.is_zero():
        return "0.0"
    parts = []
    for e, c in p.sorted_terms():
        factors = [repr(float(c))] if c != 1 else []
        for nm, k in zip(names, e):
            if k == 1:
                factors.append(nm)
            elif k:
                factors.append(f"{nm}**{k}")
        parts.append("*".join(factors) if factors else "1.0")
    return " + ".join(parts)


def compile_functions(variables: Sequence[str], funcs: Sequence[RationalFunction], labels=None):
    """Compile rational functions of ``variables`` into ``f(*arrays) -> list``.

    Denominators are checked against ``POLE_THRESHOLD``; a hit raises
    PoleError naming the offending function.
    """
    variables = tuple(variables)
    names = [f"_a{i}" for i in range(len(variables))]
    labels = list(labels) if labels is not None else [f"f{i}" for i in range(len(funcs))]
    dens: list = []
    den_idx = []
    lines = [f"def _f({', '.join(names)}):"]
    body = []
    for j, f in enumerate(funcs):
        f = RationalFunction.coerce(f).embed(variables)
        if f.den.is_constant():
            den_idx.append(None)
            body.append(f"    _r{j} = {_poly_code(f.num * (1 / f.den.constant_value()), names)}")
            continue
        for d_i, d in enumerate(dens):
            if d == f.den:
                break
        else:
            d_i = len(dens)
            dens.append(f.den)
            body.insert(0, f"    _d{d_i} = {_poly_code(f.den, names)}")
            body.insert(1, f"    if _np.min(_np.abs(_d{d_i})) < {POLE_THRESHOLD!r}: raise _Pole({labels[j]!r})")
        den_idx.append(d_i)
        body.append(f"    _r{j} = ({_poly_code(f.num, names)}) / _d{d_i}")
    lines.extend(body)
    lines.append(f"    return [{', '.join(f'_r{j}' for j in range(len(funcs)))}]")
    src = "\n".join(lines)

    def _pole(label):
        raise PoleError(f"denominator of {label} is within {POLE_THRESHOLD} of zero", label=label)

    ns = {"_np": np, "_Pole": _pole}
    exec(compile(src, "<stochlie-compiled>", "exec"), ns)
    fn = ns["_f"]
    fn.source = src
    return fn


class CompiledOperator:
    """Evaluates all components of an operator at once.

    ``ev(t, X)`` with X of shape ``(n, *batch)`` returns ``(ell, n, *batch)``.
    """

    def __init__(self, op: StochOperator):
        self.op = op
        self.n = op.dim
        self.ell = op.ell
        funcs, labels = [], []
        vs = op.chart + (TIME,)
        for j, comp in enumerate(op.components()):
            for i, v in enumerate(op.chart):
                funcs.append(comp.component(i))
                labels.append(f"{'drift' if j == 0 else f'noise{j}'}[{v}]")
        self._fn = compile_functions(vs, funcs, labels)

    def __call__(self, t: float, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        vals = self._fn(*X, float(t))
        out = np.empty((self.ell, self.n) + X.shape[1:])
        for j in range(self.ell):
            for i in range(self.n):
                out[j, i] = vals[j * self.n + i]
        return out


def compile_operator(op: StochOperator) -> CompiledOperator:
    return CompiledOperator(op)


@dataclass
class Trajectory:
    grid: np.ndarray
    states: np.ndarray  # (N+1, n, *batch)
    scheme: str
    chart: tuple
    path: BrownianPath | None = field(default=None, repr=False)

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    def component(self, name: str) -> np.ndarray:
        return self.states[:, self.chart.index(name)]


def _prepare(op, x0, path: BrownianPath | None, T=None, N=None):
    if path is None:
        if op.noises:
            raise ValueError("a Brownian path is required for an operator with noise")
        if T is None or N is None:
            raise ValueError("give T and N when no path is supplied")
        path = BrownianPath(0, float(T), int(N), np.zeros((0, int(N))))
    if path.dims != len(op.noises):
        raise ValueError(f"path has {path.dims} noise sources, operator has {len(op.noises)}")
    x = np.array(x0, dtype=float)
    if x.shape[0] != op.dim:
        raise ValueError(f"initial state has {x.shape[0]} entries, chart has {op.dim}")
    batch = path.batch
    if x.ndim == 1 and batch:
        x = np.repeat(x[:, None], batch[0], axis=1)
    elif x.ndim > 1 and x.shape[1:] != batch:
        raise ValueError(f"initial batch shape {x.shape[1:]} does not match path batch {batch}")
    return x, path


def _increment(S, dt, dW_k):
    incr = S[0] * dt
    for b in range(S.shape[0] - 1):
        incr = incr + S[b + 1] * dW_k[b]
    return incr


def _run(op, x0, path, scheme, T=None, N=None, compiled=None):
    x, path = _prepare(op, x0, path, T, N)
    ev = compiled or compile_operator(op)
    dt = path.dt
    Nn = path.N
    states = np.empty((Nn + 1,) + x.shape)
    states[0] = x
    dW = path.increments
    for k in range(Nn):
        t = k * dt
        dWk = dW[:, k] if dW.shape[0] else ()
        try:
            S = ev(t, x)
            incr = _increment(S, dt, dWk)
            if scheme == "heun":
                S2 = ev(t + dt, x + incr)
                incr = 0.5 * (incr + _increment(S2, dt, dWk))
        except PoleError as exc:
            raise PoleError(f"step {k}: {exc}", label=exc.label, step=k) from None
        x = x + incr
        states[k + 1] = x
    return Trajectory(path.grid, states, scheme, op.chart, path)


def integrate_em(op: StochOperator, x0, path: BrownianPath | None = None, T=None, N=None, compiled=None) -> Trajectory:
    """Euler-Maruyama; only for Itô operators."""
    if op.interpretation != ITO:
        raise InterpretationError("Euler-Maruyama integrates Itô operators; convert first")
    return _run(op, x0, path, "em", T, N, compiled)


def integrate_heun(op: StochOperator, x0, path: BrownianPath | None = None, T=None, N=None, compiled=None) -> Trajectory:
    """Heun predictor-corrector; only for Stratonovich operators."""
    if op.interpretation != STRAT:
        raise InterpretationError("Heun integrates Stratonovich operators; convert first")
    return _run(op, x0, path, "heun", T, N, compiled)


def integrate(op: StochOperator, x0, path=None, scheme: str | None = None, **kw) -> Trajectory:
    scheme = scheme or ("em" if op.interpretation == ITO else "heun")
    if scheme == "em":
        return integrate_em(op, x0, path, **kw)
    if scheme == "heun":
        return integrate_heun(op, x0, path, **kw)
    raise ValueError(f"unknown scheme {scheme!r}")


def gbm_exact(a, b) -> Callable:
    """Closed form x0 exp((a - b^2/2) T + b W_T) of Itô GBM."""
    a, b = float(a), float(b)

    def exact(x0, T, W_T):
        return np.asarray(x0, dtype=float) * np.exp((a - 0.5 * b * b) * T + b * np.asarray(W_T))

    return exact


@dataclass(frozen=True)
class OrderEstimate:
    slope: float | None
    steps: tuple
    errors: tuple
    exact: bool = False

    def to_json(self):
        return {"slope": self.slope, "steps": list(self.steps), "errors": list(self.errors), "exact": self.exact}


def _slope(steps, errors):
    errors = np.asarray(errors, dtype=float)
    if np.max(errors) < 1e-12:
        return None, True
    return float(np.polyfit(np.log2(steps), np.log2(errors), 1)[0]), False


def _fine_path(seed, T, steps, dims, paths):
    steps = sorted(float(h) for h in steps)
    ratios = [T / h for h in steps]
    Ns = [int(round(r)) for r in ratios]
    if any(abs(r - n) > 1e-9 for r, n in zip(ratios, Ns)):
        raise ValueError("each step must divide T")
    fine_N = Ns[0]
    if any(fine_N % n for n in Ns):
        raise ValueError("coarse grids must nest inside the finest grid")
    return sample_ensemble(seed, T, fine_N, dims, paths), Ns


def strong_order_estimate(op: StochOperator, exact: Callable, x0, steps, paths: int = 200, T: float = 1.0, seed: int = 0) -> OrderEstimate:
    """Slope of log2(mean |X_T - exact|) against log2(dt) for a 1-d model.

    All coarse paths are block sums of one fine ensemble.
    ``exact(x0, T, W_T)`` evaluates the closed form for every path.
    """
    fine, Ns = _fine_path(seed, T, steps, len(op.noises), paths)
    ev = compile_operator(op)
    errs = []
    hs = []
    ref = exact(np.asarray(x0, dtype=float), T, fine.terminal()[0])
    for n in sorted(Ns):
        path = fine.coarsen(fine.N // n)
        traj = integrate(op, x0, path, compiled=ev)
        errs.append(float(np.mean(np.abs(traj.terminal - ref).max(axis=0))))
        hs.append(T / n)
    slope, is_exact = _slope(hs, errs)
    return OrderEstimate(slope, tuple(hs), tuple(errs), is_exact)


def cross_scheme_slope(ito_op: StochOperator, strat_op: StochOperator, x0, steps, paths: int = 200, T: float = 1.0, seed: int = 0) -> OrderEstimate:
    """Mean terminal max-norm gap between EM on ``ito_op`` and Heun on ``strat_op``."""
    fine, Ns = _fine_path(seed, T, steps, len(ito_op.noises), paths)
    ev_i, ev_s = compile_operator(ito_op), compile_operator(strat_op)
    errs, hs = [], []
    for n in sorted(Ns):
        path = fine.coarsen(fine.N // n)
        a = integrate_em(ito_op, x0, path, compiled=ev_i).terminal
        b = integrate_heun(strat_op, x0, path, compiled=ev_s).terminal
        errs.append(float(np.mean(np.abs(a - b).max(axis=0))))
        hs.append(T / n)
    slope, is_exact = _slope(hs, errs)
    return OrderEstimate(slope, tuple(hs), tuple(errs), is_exact)


def write_csv(traj: Trajectory, fh, member: int | None = None):
    """Write ``t,<vars>`` rows with 17 significant digits."""
    states = traj.states
    if states.ndim == 3:
        states = states[:, :, 0 if member is None else member]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("t",) + tuple(traj.chart))
    for t, row in zip(traj.grid, states):
        w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def write_ensemble_csv(traj: Trajectory, fh):
    """Long format ``path,t,<vars>``; one block of rows per ensemble member."""
    states = traj.states if traj.states.ndim == 3 else traj.states[:, :, None]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("path", "t") + tuple(traj.chart))
    for m in range(states.shape[2]):
        for t, row in zip(traj.grid, states[:, :, m]):
            w.writerow([m, f"{t:.17g}"] + [f"{v:.17g}" for v in row])
