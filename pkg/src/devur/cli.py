"""``devur`` command line.

Exit status: 0 on success, 2 for invalid input, 3 when a numerical result
contradicts a proven bound or an internal invariant.  Results go to
standard output (or ``--out``) as JSON, with the effective tolerances and
seed echoed under ``"meta"``; curves and tables are CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import contwave as cw
from . import entwit, relations, steering
from .deviation import md_uncertainty
from .errors import DevurError, ValidationError
from .io import csv_text, dumps, load_json, observable_from_json, state_from_json, vector_from_json
from .numkit import State

DEFAULT_TOLS = {
    "holds": relations.HOLDS_TOL,
    "violation": relations.VIOLATION_TOL,
    "ortho": relations.ORTHO_TOL,
    "bisect": steering.BISECT_TOL,
    "witness-bisect": entwit.BISECT_TOL,
    "normalize": 1e-6,
}


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--json", action="store_true", help="report errors as JSON on stderr")
    g.add_argument("--out", help="write the result to this file instead of stdout")
    g.add_argument("--seed", type=int, default=None, help="random seed (fallback: $DEVUR_SEED, then 0)")
    for name, val in DEFAULT_TOLS.items():
        g.add_argument(f"--tol-{name}", type=float, default=val, dest=f"tol_{name.replace('-', '_')}",
                       help=f"tolerance override (default {val!r})")


def _positive(x):
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {x}")
    return v


def _unit_interval(x):
    v = float(x)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"expected a number in [0, 1], got {x}")
    return v


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="devur", description="Mean-deviation uncertainty relations and applications")
    root.add_argument("--version", action="version", version=f"devur {__version__}")
    sub = root.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def leaf(parent, name, help_text):
        p = parent.add_parser(name, help=help_text)
        _common(p)
        return p

    p = leaf(sub, "md", "alpha-deviation of an observable on a state")
    p.add_argument("--observable", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--alpha", type=_positive, default=1.0)
    p.set_defaults(func=cmd_md)

    rel = sub.add_parser("relation", help="product, sum and entropic relations").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    for name in ("product", "sum"):
        p = leaf(rel, name, f"{name} relation for two observables")
        p.add_argument("--a", required=True, help="observable JSON")
        p.add_argument("--b", required=True, help="observable JSON")
        p.add_argument("--state", required=True)
        p.add_argument("--alpha", type=_positive, default=1.0)
        if name == "sum":
            p.add_argument("--perp", help="JSON list of [re, im] amplitudes of the orthogonal witness")
            p.add_argument("--sign", type=int, choices=(1, -1))
        p.set_defaults(func=cmd_relation)
    p = leaf(rel, "lemma", "entropic lemma for one observable")
    p.add_argument("--observable", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_lemma)

    bnd = sub.add_parser("bound", help="state-independent bound").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    p = leaf(bnd, "state-indep", "state-independent lower bound on summed mean deviations")
    p.add_argument("--observables", nargs="+", required=True)
    p.add_argument("--alpha", type=_positive, default=1.0)
    p.add_argument("--overlap-constant", type=float)
    p.set_defaults(func=cmd_bound)

    intel = sub.add_parser("intelligent", help="position/momentum MD and SD products").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    p = leaf(intel, "gaussian", "Gaussian wavefunction")
    p.add_argument("--sigma", type=_positive, default=2**-0.5)
    p.set_defaults(func=cmd_intelligent)
    p = leaf(intel, "laplace", "Laplace-amplitude wavefunction")
    p.add_argument("--mu", type=_positive, default=1.0)
    p.set_defaults(func=cmd_intelligent)
    p = leaf(intel, "custom", "wavefunction from a JSON file {x0, step, values}")
    p.add_argument("--wavefunction", required=True)
    p.set_defaults(func=cmd_intelligent)

    cont = sub.add_parser("contwave", help="continuous-variable analyses").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    p = leaf(cont, "dispersion", "mean, MD, SD and differential entropy of a density")
    p.add_argument("--family", choices=("laplace", "gaussian", "uniform", "fdist"), required=True)
    p.add_argument("--mu", type=_positive, default=1.0)
    p.add_argument("--sigma", type=_positive, default=1.0)
    p.add_argument("--half-width", type=_positive, default=1.0)
    p.add_argument("--d1", type=int, default=1)
    p.add_argument("--d2", type=int, default=5)
    p.set_defaults(func=cmd_dispersion)
    p = leaf(cont, "fourier", "momentum density table p,|psi~|^2")
    p.add_argument("--family", choices=("gaussian", "laplace"), default="laplace")
    p.add_argument("--mu", type=_positive, default=1.0)
    p.add_argument("--sigma", type=_positive, default=2**-0.5)
    p.add_argument("--p-max", type=_positive, default=10.0)
    p.add_argument("--every", type=int, default=1, help="emit every n-th momentum sample")
    p.set_defaults(func=cmd_fourier)
    p = leaf(cont, "potential", "reconstructed potential table x,psi,|psi|^2,V")
    p.add_argument("--family", choices=("fdist", "gaussian"), default="fdist")
    p.add_argument("--d1", type=int, default=1)
    p.add_argument("--d2", type=int, default=5)
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--step", type=_positive, default=1e-3)
    p.add_argument("--energy-offset", type=float, default=0.0)
    p.add_argument("--every", type=int, default=1)
    p.set_defaults(func=cmd_potential)
    p = leaf(cont, "pareto", "Pareto-tailed wavefunction with a Gaussian patch")
    p.add_argument("--alpha-p", type=float, required=True)
    p.add_argument("--lam", type=_positive, default=1.0)
    p.add_argument("--mass-p", type=float, default=0.5)
    p.add_argument("--table", help="also write x,psi,|psi|^2 CSV to this path")
    p.set_defaults(func=cmd_pareto)
    p = leaf(cont, "fdist", "F-distribution moments: quadrature and closed forms")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.set_defaults(func=cmd_fdist)

    st = sub.add_parser("steering", help="lossy EPR-violation test").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    p = leaf(st, "check", "inferred deviations against the local bound")
    p.add_argument("--p", type=_unit_interval, required=True)
    p.add_argument("--eta", type=_unit_interval, required=True)
    p.add_argument("--alpha", type=_positive, default=1.0)
    p.add_argument("--sd-bound", choices=("reference", "tight"), default="reference")
    p.set_defaults(func=cmd_steering_check)
    p = leaf(st, "curve", "efficiency threshold curve, CSV p,eta_md,eta_sd")
    p.add_argument("--alpha", type=_positive, default=1.0)
    p.add_argument("--p-min", type=float, default=0.58)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=50)
    p.set_defaults(func=cmd_steering_curve)
    p = leaf(st, "alpha-sweep", "efficiency threshold for several alpha")
    p.add_argument("--alphas", type=_positive, nargs="+", default=[0.25, 0.5, 0.75, 1.0])
    p.add_argument("--p", type=_unit_interval, default=1.0)
    p.set_defaults(func=cmd_alpha_sweep)

    wt = sub.add_parser("witness", help="entanglement witness").add_subparsers(
        dest="which", required=True, parser_class=_Parser)
    for name, help_text in (("check", "witness verdict for a two-qubit state"),
                            ("werner", "Werner detection threshold"),
                            ("stress", "separable-state stress test")):
        p = leaf(wt, name, help_text)
        p.add_argument("--a", type=float, default=2**-0.5)
        p.add_argument("--b", type=float, default=2**-0.5)
        if name == "check":
            p.add_argument("--state", required=True)
        elif name == "werner":
            p.add_argument("--sweep", type=int, default=0, help="also emit CSV p,sum_md,bound with this many points")
            p.add_argument("--sweep-out", help="CSV path for --sweep")
        else:
            p.add_argument("--trials", type=int, default=10_000)
        p.set_defaults(func={"check": cmd_witness_check, "werner": cmd_werner, "stress": cmd_stress}[name])
    return root


# --- helpers ---------------------------------------------------------------


def _tols(args) -> dict:
    return {name: getattr(args, f"tol_{name.replace('-', '_')}") for name in DEFAULT_TOLS}


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DEVUR_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"DEVUR_SEED must be an integer, got {env!r}") from exc


def _relation_tols(args) -> relations.Tolerances:
    t = _tols(args)
    return relations.Tolerances(holds=t["holds"], violation=t["violation"], ortho=t["ortho"])


def _meta(args, **extra) -> dict:
    path = [args.cmd] + ([args.which] if getattr(args, "which", None) else [])
    return {"command": " ".join(path), "tolerances": _tols(args), **extra}


def _json_result(args, result, **meta) -> str:
    return dumps({"result": result, "meta": _meta(args, **meta)})


def _load_state(path):
    data = load_json(path)
    if isinstance(data, dict) and data.get("kind") == "pure" and data.get("normalize"):
        return State.pure(vector_from_json(data["amplitudes"]), normalize=True)
    return state_from_json(data)


def _family(args) -> entwit.WitnessFamily:
    return entwit.WitnessFamily.normalized(args.a, args.b, tol=_tols(args)["normalize"])


# --- commands --------------------------------------------------------------


def cmd_md(args) -> str:
    rep = md_uncertainty(observable_from_json(load_json(args.observable)), _load_state(args.state), args.alpha)
    return _json_result(args, rep.to_json())


def cmd_relation(args) -> str:
    a = observable_from_json(load_json(args.a))
    b = observable_from_json(load_json(args.b))
    state = _load_state(args.state)
    tols = _relation_tols(args)
    if args.which == "product":
        v = relations.product_relation(a, b, state, args.alpha, tols=tols)
    else:
        perp = vector_from_json(load_json(args.perp)) if args.perp else None
        v = relations.sum_relation(a, b, state, perp=perp, sign=args.sign, alpha=args.alpha, tols=tols)
    return _json_result(args, v.to_json())


def cmd_lemma(args) -> str:
    v = relations.entropic_lemma_check(observable_from_json(load_json(args.observable)),
                                       _load_state(args.state), args.alpha, tols=_relation_tols(args))
    return _json_result(args, v.to_json())


def cmd_bound(args) -> str:
    obs = [observable_from_json(load_json(p)) for p in args.observables]
    val = relations.state_independent_bound(relations.ObservableSet(obs), args.alpha, args.overlap_constant)
    return _json_result(args, {"bound": val, "alpha": args.alpha, "observables": len(obs)})


def cmd_intelligent(args) -> str:
    if args.which == "gaussian":
        psi = cw.gaussian_wavefunction(args.sigma)
    elif args.which == "laplace":
        psi = cw.laplace_wavefunction(args.mu)
    else:
        d = load_json(args.wavefunction)
        psi = cw.SampledWavefunction(x0=float(d["x0"]), step=float(d["step"]), values=vector_from_json(d["values"]))
    rep = cw.intelligent_product(psi)
    return _json_result(args, rep.to_json(), reference_md_product=1 / math.pi)


def cmd_dispersion(args) -> str:
    dens = {
        "laplace": lambda: cw.laplace(args.mu),
        "gaussian": lambda: cw.gaussian(args.sigma),
        "uniform": lambda: cw.uniform(args.half_width),
        "fdist": lambda: cw.f_distribution(args.d1, args.d2),
    }[args.family]()
    return _json_result(args, cw.dispersion(dens).to_json(), family=dens.name)


def cmd_fourier(args) -> str:
    psi = cw.gaussian_wavefunction(args.sigma) if args.family == "gaussian" else cw.laplace_wavefunction(args.mu)
    phi = cw.fourier(psi)
    w = phi.window(min(args.p_max, phi.trusted))
    p, dens = w.x[:: max(1, args.every)], w.density[:: max(1, args.every)]
    return csv_text(["p", "abs_psi_p_sq"], zip(p, dens))


def cmd_potential(args) -> str:
    if args.family == "fdist":
        dens = cw.f_distribution(args.d1, args.d2)
        psi = cw.from_function(lambda x: np.sqrt(np.array([dens.pdf(t) for t in x])), args.x_min, args.x_max, args.step)
    else:
        psi = cw.from_function(lambda x: np.pi**-0.25 * np.exp(-x * x / 2), args.x_min, args.x_max, args.step)
    res = cw.potential_from_wavefunction(psi, args.energy_offset)
    k = max(1, args.every)
    vals = psi.values.real
    rows = zip(res.x[::k], vals[::k], (vals**2)[::k], res.V[::k])
    return csv_text(["x", "psi", "psi_sq", "V"], rows)


def cmd_pareto(args) -> str:
    pw = cw.pareto_wavefunction(args.alpha_p, args.lam, args.mass_p)
    disp = cw.dispersion(pw.density())
    if args.table:
        s = pw.sample(pw.x0 - 6 * math.sqrt(pw.w), 20 * pw.lam, 1e-3 * pw.lam)
        with open(args.table, "w", encoding="utf-8") as fh:
            fh.write(csv_text(["x", "psi", "psi_sq"], zip(s.x, s.values.real, s.density)))
    result = {
        "alpha_p": pw.alpha_p, "lam": pw.lam, "mass_p": pw.mass_p,
        "patch": {"c": pw.c, "x0": pw.x0, "w": pw.w, "residuals": list(pw.residuals), "iterations": pw.iterations},
        "dispersion": disp.to_json(),
    }
    return _json_result(args, result)


def cmd_fdist(args) -> str:
    disp = cw.dispersion(cw.f_distribution(args.d1, args.d2))
    result = {"dispersion": disp.to_json(),
              "closed_form": {"mean": cw.f_mean(args.d2), "sd": cw.f_sd(args.d1, args.d2)}}
    return _json_result(args, result)


def cmd_steering_check(args) -> str:
    rep = steering.check_epr_violation(steering.build_model(args.p, args.eta), args.alpha, args.sd_bound)
    return _json_result(args, rep.to_json())


def cmd_steering_curve(args) -> str:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not 0 < args.p_min <= args.p_max <= 1:
        raise UsageError("need 0 < p-min <= p-max <= 1")
    grid = np.linspace(args.p_min, args.p_max, args.steps) if args.steps > 1 else np.array([args.p_max])
    tol = _tols(args)["bisect"]
    md = steering.threshold_curve(args.alpha, grid, tol=tol)
    sd = steering.threshold_curve(2.0, grid, tol=tol)
    return csv_text(["p", "eta_md", "eta_sd"], ((a.p, a.eta, b.eta) for a, b in zip(md.points, sd.points)))


def cmd_alpha_sweep(args) -> str:
    res = steering.alpha_sweep(args.alphas, args.p, tol=_tols(args)["bisect"])
    res["thresholds"] = [{"alpha": a, "eta": e} for a, e in res["thresholds"].items()]
    return _json_result(args, res)


def cmd_witness_check(args) -> str:
    return _json_result(args, entwit.witness(_family(args), _load_state(args.state)).to_json())


def cmd_werner(args) -> str:
    fam = _family(args)
    thr = entwit.werner_threshold(fam, tol=_tols(args)["witness-bisect"])
    if args.sweep:
        rows = entwit.werner_sweep(fam, np.linspace(0, 1, args.sweep))
        text = csv_text(["p", "sum_md", "bound"], rows)
        if args.sweep_out:
            with open(args.sweep_out, "w", encoding="utf-8") as fh:
                fh.write(text)
    return _json_result(args, {"threshold": thr, "closed_form": fam.werner_closed_form(), "a": fam.a, "b": fam.b})


def cmd_stress(args) -> str:
    seed = _seed(args)
    rep = entwit.separable_stress_test(_family(args), args.trials, seed)
    return _json_result(args, rep.to_json(), seed=seed)


# --- entry point -----------------------------------------------------------


def _report_error(exc: BaseException, as_json: bool, code: int) -> None:
    if as_json:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    else:
        sys.stderr.write(f"devur: {type(exc).__name__}: {exc}\n")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        text = args.func(args)
    except DevurError as exc:
        _report_error(exc, as_json, exc.exit_code)
        return exc.exit_code
    except (FileNotFoundError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        _report_error(exc, as_json, 2)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
