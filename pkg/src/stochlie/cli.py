"""Command-line front end.

Exit codes: 0 positive verdict, 3 negative but valid verdict, 1 error.
Reports are JSON (sorted keys, no timestamps) and embed the effective
configuration, so re-running a report's config reproduces it byte for byte.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, models
from .errors import ParseError, StochLieError
from .hamiltonian import (
    CasimirElement,
    NotHamiltonian,
    SymplecticForm,
    coalgebra_constant,
    casimir_verify,
    is_hamiltonian_system,
)
from .modelfile import dump_model, load_model_file, normalize_params
from .polyalg import as_fraction
from .prolong import builtin_rule, diagonal_prolong, first_integrals_poly, minimal_m, verify_superposition
from .sde_sim import integrate, sample_ensemble, write_ensemble_csv
from .stratonovich import ITO, STRAT, classify_stochastic_lie, classify_foliated, convert
from .vecfield import VectorField
from .stability import (
    MomentumMapSpec,
    dirichlet_check,
    find_equilibria,
    relative_equilibrium_solve,
)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 3

# Single table of default tolerances; --tol overrides the one a command uses.
TOLERANCES = {
    "equilibria": 1e-10,  # Newton residual
    "dirichlet": 1e-9,  # criticality / Hessian at irrational points
    "releq": 1e-10,  # Newton residual; RelEquH acceptance is max(100*tol, 1e-8)
    "verify-sr": 1e-3,  # relative superposition residual
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


# ---------------------------------------------------------------------------
# model loading


def parse_set(text: str | None) -> dict:
    """``k=0,sigma=1/2`` -> {"k": "0", "sigma": "1/2"}."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise CliError(f"--set expects name=value pairs, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    try:
        normalize_params(out)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return out


def parse_point(text: str):
    try:
        return tuple(as_fraction(v) for v in text.split(","))
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad point {text!r}: {exc}") from None


class Loaded:
    """A model from the catalog or a file, plus its catalog entry if any."""

    def __init__(self, source: str, overrides: dict):
        self.source = source
        self.entry = None
        if source in models.ids():
            self.entry = models.get(source, overrides or None)
            self.op = self.entry.operator
            self.params = self.entry.params
        elif Path(source).exists():
            try:
                self.op, data = load_model_file(source, overrides or None)
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise CliError(str(exc)) from None
            self.params = normalize_params(data.get("params"))
            self.params.update(normalize_params(overrides))
        else:
            raise CliError(f"{source!r} is neither a catalog id nor a model file")

    def attachment(self, name):
        return getattr(self.entry, name, None) if self.entry else None


def _stratonovich(loaded: Loaded, notices: list, auto: bool = True):
    op = loaded.op
    if op.interpretation == STRAT:
        return op
    if not auto:
        raise CliError("model is in Ito form; pass --auto-convert")
    notices.append("Ito input converted to Stratonovich form before analysis")
    return convert(op, STRAT)


# ---------------------------------------------------------------------------
# output


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(args, result: dict, notices=()) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    doc = {"artifact": "stochlie", "version": __version__, "config": config, "result": result}
    if notices:
        doc["notices"] = list(notices)
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    loaded = Loaded(args.model, parse_set(args.set))
    notices = []
    op = _stratonovich(loaded, notices)
    hint = loaded.entry.hint_fields() if loaded.entry else None
    labels = loaded.entry.labels if loaded.entry else ()
    res = classify_stochastic_lie(op, basis_hint=hint, labels=labels)
    result = res.to_json()
    fol = loaded.attachment("foliated")
    if fol is not None:
        e = loaded.entry
        fields = [VectorField(op.chart, [e.parse(c) for c in cs]) for cs in fol["fields"]]
        coeffs = [[e.parse(c, op.chart + ("t",)) for c in row] for row in fol["coefficients"]]
        result["foliated"] = "yes" if classify_foliated(op, fields, coeffs) else "no"
    _emit(_report(args, result, notices), args.out)
    return EXIT_OK if res.is_lie else EXIT_NEGATIVE


def cmd_convert(args) -> int:
    loaded = Loaded(args.model, parse_set(args.set))
    op = loaded.op
    if args.roundtrip:
        other = ITO if op.interpretation == STRAT else STRAT
        back = convert(convert(op, other), op.interpretation)
        ok = back.equivalent(op) and back.noises == op.noises
        result = {"roundtrip_identity": ok, "interpretation": op.interpretation, "via": other}
        _emit(_report(args, result), args.out)
        return EXIT_OK if ok else EXIT_NEGATIVE
    if not args.to:
        raise CliError("convert needs --to ito|stratonovich (or --roundtrip)")
    target = convert(op, args.to) if args.to != op.interpretation else op
    text = json.dumps(dump_model(target, loaded.params), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _x0(args, op):
    if args.x0:
        pt = parse_point(args.x0)
        if len(pt) != op.dim:
            raise CliError(f"--x0 has {len(pt)} entries, chart has {op.dim}")
        return [float(v) for v in pt]
    return [1.0] * op.dim


def cmd_simulate(args) -> int:
    loaded = Loaded(args.model, parse_set(args.set))
    op = loaded.op
    notices = []
    scheme = args.scheme or ("em" if op.interpretation == ITO else "heun")
    needed = ITO if scheme == "em" else STRAT
    if op.interpretation != needed:
        if not args.auto_convert:
            raise CliError(f"scheme {scheme} needs the {needed} form; model is {op.interpretation} (use --auto-convert)")
        notices.append(f"model converted to {needed} form for scheme {scheme}")
        op = convert(op, needed)
    path = sample_ensemble(args.seed, args.T, args.N, len(op.noises), args.paths)
    traj = integrate(op, _x0(args, op), path, scheme)
    term = traj.terminal  # (n, paths)
    summary = {
        "scheme": scheme,
        "chart": list(op.chart),
        "terminal_mean": {v: float(np.mean(term[i])) for i, v in enumerate(op.chart)},
        "terminal_variance": {v: float(np.var(term[i], ddof=1)) if args.paths > 1 else 0.0 for i, v in enumerate(op.chart)},
        "paths": args.paths,
    }
    if args.csv:
        buf = io.StringIO()
        write_ensemble_csv(traj, buf)
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
        summary["csv"] = args.csv
    _emit(_report(args, summary, notices), args.out)
    return EXIT_OK


def _omega(args, loaded: Loaded, op) -> SymplecticForm:
    if args.omega:
        text, _, factor = args.omega.partition("@")
        pairs = [tuple(p.split(":")) for p in text.split(",") if p]
        if any(len(p) != 2 for p in pairs):
            raise CliError("--omega expects q:p pairs, e.g. 'q:p' or 'x1:y1,x2:y2@1/(x1*y1)'")
        consts = loaded.entry.constants() if loaded.entry else None
        from .polyalg import RationalFunction

        f = RationalFunction.parse(factor or "1", op.chart, consts)
        return SymplecticForm.from_pairs(op.chart, pairs, f)
    if loaded.attachment("no_symplectic"):
        raise CliError(f"{loaded.source} has no symplectic structure (Hamiltonian analysis skipped)")
    om = loaded.entry.omega() if loaded.entry else None
    if om is None:
        raise CliError("missing symplectic form: pass --omega")
    return om


def _hamiltonian(args, loaded, notices):
    op = _stratonovich(loaded, notices)
    omega = _omega(args, loaded, op)
    hint = loaded.entry.hint_fields() if loaded.entry else None
    return op, omega, is_hamiltonian_system(op, omega, basis_hint=hint)


def analyze_hamiltonian(args, loaded, notices):
    _, _, lha = _hamiltonian(args, loaded, notices)
    if isinstance(lha, NotHamiltonian):
        return {"hamiltonian": False, **lha.to_json()}, EXIT_NEGATIVE
    return {"hamiltonian": True, **lha.to_json()}, EXIT_OK


def analyze_casimir(args, loaded, notices):
    _, _, lha = _hamiltonian(args, loaded, notices)
    if isinstance(lha, NotHamiltonian):
        return {"hamiltonian": False, **lha.to_json()}, EXIT_NEGATIVE
    text = args.casimir or (loaded.attachment("casimir") or {}).get("text")
    if not text:
        raise CliError("missing Casimir: pass --casimir 'polynomial in v1..vr'")
    r = lha.dim
    C = CasimirElement.parse(text, r)
    ok, witness = casimir_verify(lha.structure, C)
    result = {"casimir": str(C.poly), "casimir_ok": ok, "dim": r}
    if not ok:
        result["witness"] = {"generator": f"v{witness[0] + 1}", "bracket": str(witness[1])}
        return result, EXIT_NEGATIVE
    cc = coalgebra_constant(C, lha, args.k)
    result["coalgebra"] = cc.to_json()
    return result, EXIT_OK if cc.verified else EXIT_NEGATIVE


def analyze_equilibria(args, loaded, notices):
    op = _stratonovich(loaded, notices)
    tol = args.tol or TOLERANCES["equilibria"]
    if args.starts:
        starts = [tuple(float(v) for v in parse_point(s)) for s in args.starts.split(";")]
    else:
        rng = np.random.default_rng(args.seed)
        starts = [tuple(row) for row in rng.uniform(-2, 2, size=(8, op.dim))]
    search = find_equilibria(op, starts, tol=tol)
    result = search.to_json()
    result["tol"] = tol
    if args.at:
        from .stability import check_equilibrium

        result["checked"] = check_equilibrium(op, parse_point(args.at)).to_json()
    return result, EXIT_OK if search.equilibria else EXIT_NEGATIVE


def analyze_dirichlet(args, loaded, notices):
    op = _stratonovich(loaded, notices)
    tol = args.tol or TOLERANCES["dirichlet"]
    f = args.f or (loaded.attachment("conserved") or (None,))[0]
    if not f:
        raise CliError("missing candidate function: pass --f")
    if not args.at:
        raise CliError("missing equilibrium point: pass --at")
    consts = loaded.entry.constants() if loaded.entry else None
    from .polyalg import RationalFunction

    verdict = dirichlet_check(op, RationalFunction.parse(f, op.chart, consts), parse_point(args.at), tol)
    result = verdict.to_json()
    result.update({"f": f, "tol": tol})
    return result, EXIT_OK if verdict.stable else EXIT_NEGATIVE


def analyze_releq(args, loaded, notices):
    mom = loaded.attachment("momentum")
    if mom is None:
        raise CliError("missing momentum map: this analysis needs a catalog entry with a momentum attachment")
    op = _stratonovich(loaded, notices)
    omega = _omega(args, loaded, op)
    e = loaded.entry
    gens = [VectorField(op.chart, [e.parse(c) for c in g]) for g in mom["generators"]]
    mm = MomentumMapSpec(omega, gens, [e.parse(c) for c in mom["components"]])
    hams = [e.parse(h) for h in mom["hamiltonians"]]
    point = [float(v) for v in (parse_point(args.at) if args.at else map(as_fraction, mom["guess_point"]))]
    xi = [[float(as_fraction(v)) for v in row] for row in mom["guess_xi"]]
    tol = args.tol or TOLERANCES["releq"]
    res = relative_equilibrium_solve(hams, mm, point, xi, tol=tol)
    out = res.to_json()
    out["tol"] = tol
    return out, EXIT_OK if res.converged else EXIT_NEGATIVE


def analyze_verify_sr(args, loaded, notices):
    op = _stratonovich(loaded, notices)
    name = args.rule or loaded.attachment("rule")
    if not name:
        raise CliError("missing superposition rule: pass --rule (linear<m>, affine<m>, wrong-product)")
    try:
        rule = builtin_rule(name, op.chart)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    tol = args.tol or TOLERANCES["verify-sr"]
    rep = verify_superposition(rule, op, trials=args.trials, T=args.T, N=args.N, tol=tol, seed=args.seed)
    out = rep.to_json()
    out["rule"] = rule.to_json()
    return out, EXIT_OK if rep.passed else EXIT_NEGATIVE


def analyze_first_integrals(args, loaded, notices):
    op = _stratonovich(loaded, notices)
    hint = loaded.entry.hint_fields() if loaded.entry else None
    cls = classify_stochastic_lie(op, basis_hint=hint)
    if not cls.is_lie:
        return {"first_integrals": [], "reason": f"not a stochastic Lie system ({cls.reason})"}, EXIT_NEGATIVE
    basis = cls.algebra.basis
    m = minimal_m(basis)
    k = args.k or m + 1
    fields = [diagonal_prolong(Y, k, start=0) for Y in basis]
    ints = first_integrals_poly(fields, args.degree)
    result = {"m": m, "copies": k, "degree": args.degree, "first_integrals": [str(F) for F in ints]}
    return result, EXIT_OK if ints else EXIT_NEGATIVE


ANALYSES = {
    "equilibria": analyze_equilibria,
    "dirichlet": analyze_dirichlet,
    "releq": analyze_releq,
    "hamiltonian": analyze_hamiltonian,
    "casimir": analyze_casimir,
    "verify-sr": analyze_verify_sr,
    "first-integrals": analyze_first_integrals,
}


def cmd_analyze(args) -> int:
    loaded = Loaded(args.model, parse_set(args.set))
    notices = []
    result, code = ANALYSES[args.analysis](args, loaded, notices)
    result["analysis"] = args.analysis
    _emit(_report(args, result, notices), args.out)
    return code


def cmd_catalog(args) -> int:
    if args.action == "list":
        text = json.dumps(models.list_entries(), indent=2, sort_keys=True) + "\n"
    elif args.action == "show":
        text = json.dumps(models.get(args.id).summary(), indent=2, sort_keys=True) + "\n"
    else:
        text = json.dumps(models.export(args.id, parse_set(args.set) or None), indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stochlie", description="Stochastic Lie system toolkit.")
    p.add_argument("--version", action="version", version=f"stochlie {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="catalog id or model file path")
            sp.add_argument("--set", default=None, metavar="k=v,...", help="parameter overrides")
        sp.add_argument("--out", default=None, help="write the report here instead of stdout")

    sp = sub.add_parser("classify", help="decide whether a model is a stochastic Lie system")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("convert", help="Ito <-> Stratonovich conversion")
    common(sp)
    sp.add_argument("--to", choices=[ITO, STRAT])
    sp.add_argument("--roundtrip", action="store_true")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("simulate", help="integrate a path ensemble")
    common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--N", type=int, default=1000)
    sp.add_argument("--paths", type=int, default=1)
    sp.add_argument("--scheme", choices=["em", "heun"])
    sp.add_argument("--x0", default=None, help="initial state, comma separated (default all ones)")
    sp.add_argument("--auto-convert", action="store_true")
    sp.add_argument("--csv", default=None, help="write trajectories (long format) here")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="stability, Hamiltonian and superposition analyses")
    sp.add_argument("analysis", choices=sorted(ANALYSES))
    common(sp)
    sp.add_argument("--f", default=None, help="candidate conserved function (dirichlet)")
    sp.add_argument("--at", default=None, help="point, comma separated")
    sp.add_argument("--starts", default=None, help="Newton starts 'x,y;x,y' (equilibria)")
    sp.add_argument("--omega", default=None, help="symplectic form 'q:p,...[@factor]'")
    sp.add_argument("--casimir", default=None, help="Casimir polynomial in v1..vr")
    sp.add_argument("--k", type=int, default=None, help="number of copies (casimir, first-integrals)")
    sp.add_argument("--degree", type=int, default=2, help="ansatz degree (first-integrals)")
    sp.add_argument("--rule", default=None, help="superposition rule (verify-sr)")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--N", type=int, default=10_000)
    sp.add_argument("--tol", type=float, default=None)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("catalog", help="list, show or export catalog entries")
    sp.add_argument("action", choices=["list", "show", "export"])
    sp.add_argument("id", nargs="?")
    sp.add_argument("--set", default=None)
    common(sp, model=False)
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze" and args.analysis == "casimir" and args.k is None:
        args.k = 2
    if args.command == "catalog" and args.action != "list" and not args.id:
        parser.error("catalog show/export need an id")
    try:
        return args.func(args)
    except (CliError, StochLieError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
