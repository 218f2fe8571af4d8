"""Command-line front end.

Subcommands
-----------
classify   SC + Feller verdicts for a manifold spec or preset
spectrum   ball / exterior / essential-spectrum eigenvalue estimates
simulate   Monte Carlo explosion fractions and hitting Laplace transforms
reproduce  regenerate the reference comparison tables, pass/fail per cell

Exit codes: 0 ok, 2 usage/validation error, 3 all verdicts inconclusive,
4 reproduction mismatch.
"""

import argparse
import os
import sys
from pathlib import Path

from .errors import WmlError
from .manifold import load_manifold, preset
from .report import Report, clean

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_MISMATCH = 4

REPRODUCE_IDS = ("feller-alpha-table", "stoch-incomplete-model",
                 "discrete-spectrum-alpha", "soliton-audit")


def _add_manifold_args(sub):
    grp = sub.add_mutually_exclusive_group(required=True)
    grp.add_argument("--manifold", metavar="FILE",
                     help="path to a key=value manifold spec")
    grp.add_argument("--preset", metavar="NAME",
                     help="named preset, e.g. hyperbolic-2 or exp-alpha-2-3")


def _load_target(args):
    if args.preset is not None:
        M = preset(args.preset)
        return M, M.to_dict()
    text = Path(args.manifold).read_text()
    M = load_manifold(text)
    return M, M.to_dict()


def _emit(report, args):
    text = report.to_json()
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _write_table(path, header, rows):
    """CSV plus a sibling .gp gnuplot script (no plotting runtime)."""
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(f"{c}" for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    gp = path.with_suffix(".gp")
    gp.write_text(
        "set datafile separator ','\n"
        f"set xlabel '{header[0]}'\n"
        f"set ylabel '{header[1]}'\n"
        "set logscale y\n"
        f"plot '{path.name}' skip 1 using 1:2 with linespoints "
        f"title '{header[1]}'\n")


# --------------------------------------------------------------------------
# classify
# --------------------------------------------------------------------------

def cmd_classify(args):
    from .integrability import feller, stochastic_completeness
    M, echo = _load_target(args)
    sc = stochastic_completeness(M)
    fe = feller(M)
    results = clean({"stochastic_completeness": sc.to_dict(),
                     "feller": fe.to_dict()})
    _emit(Report("classify", echo, results), args)
    if sc.verdict == "Unknown" and fe.verdict == "Unknown":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

def cmd_spectrum(args):
    from .spectral import ess_spectrum_bottom, lambda1_exterior, lambda1_interval
    M, echo = _load_target(args)
    warnings = []
    if args.ball is not None:
        if args.ball <= 0:
            raise WmlError("--ball radius must be positive")
        res = lambda1_interval(M, 0.0, args.ball)
        results = {"mode": "ball", "radius": args.ball,
                   "lambda1": res.lambda1, "method": res.method,
                   "residual": res.residual, "mesh": res.mesh_meta}
    elif args.exterior is not None:
        if args.exterior <= 0:
            raise WmlError("--exterior radius must be positive")
        res = lambda1_exterior(M, args.exterior, atol=args.atol)
        results = {"mode": "exterior", "radius": args.exterior,
                   "lambda1": res.lambda1, "method": res.method,
                   "residual": res.residual, "mesh": res.mesh_meta}
    else:
        radii = sorted(float(t) for t in args.ess.split(","))
        if not radii or any(R <= 0 for R in radii):
            raise WmlError("--ess needs positive radii")
        rep = ess_spectrum_bottom(M, radii, atol=args.atol)
        results = {"mode": "ess", "radii": rep.radii,
                   "exterior_lambda1": rep.exterior_lambda1,
                   "bottom_estimate": rep.bottom_estimate,
                   "unbounded": rep.unbounded,
                   "monotone_ok": rep.monotone_ok}
        if args.csv:
            _write_table(args.csv, ("R", "lambda1_exterior"),
                         list(zip(rep.radii, rep.exterior_lambda1)))
    _emit(Report("spectrum", echo, clean(results), warnings), args)
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(args):
    from .montecarlo import SimConfig, hitting_laplace, simulate_explosion
    M, echo = _load_target(args)
    cfg = SimConfig(n_paths=args.paths, t_max=args.t_max,
                    dt_base=args.dt, r_absorb_outer=args.outer,
                    seed=args.seed)
    if args.hit_radius is not None:
        rep = hitting_laplace(M, args.r0, args.hit_radius, args.hit_lambda,
                              cfg)
        results = {"mode": "hitting", **rep.to_dict()}
    else:
        rep = simulate_explosion(M, args.r0, cfg)
        results = {"mode": "explosion", **rep.to_dict()}
    _emit(Report("simulate", echo, clean(results)), args)
    return EXIT_OK


# --------------------------------------------------------------------------
# reproduce
# --------------------------------------------------------------------------

def _repro_feller_alpha():
    from .integrability import feller
    rows = []
    for m in (2, 3):
        for alpha in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
            M = preset(f"exp-alpha-{m}-{alpha}")
            got = feller(M).verdict
            want = "Yes" if alpha <= 2 else "No"
            rows.append({"m": m, "alpha": alpha, "feller": got,
                         "expected": want, "pass": got == want})
    return {"table": rows}, [("alpha,m", "feller")]


def _repro_stoch_incomplete():
    from .integrability import stochastic_completeness
    cases = [("euclidean-3", "Yes"), ("hyperbolic-2", "Yes"),
             ("gaussian-shrinker-2-0.5", "Yes"), ("exp-growth-2", "No")]
    rows = []
    for name, want in cases:
        rep = stochastic_completeness(preset(name))
        ok = rep.verdict == want
        row = {"preset": name, "sc": rep.verdict, "expected": want,
               "pass": ok}
        if rep.verdict == "No":
            ev = rep.criteria_evidence[0]
            row["u_star"] = ev.value
            row["pass"] = ok and ev.value is not None and ev.value > 0
        rows.append(row)
    return {"table": rows}, None


def _repro_discrete_spectrum():
    from .spectral import ess_spectrum_bottom, half_drift_squared_bound
    M = preset("exp-alpha-2-3")
    radii = [1.0, 2.0, 4.0, 8.0]
    rep = ess_spectrum_bottom(M, radii, atol=1e-4)
    rows = []
    prev = 0.0
    for R, lam in zip(rep.radii, rep.exterior_lambda1):
        lower = half_drift_squared_bound(M, R)
        ok = lam > prev and (not lower.applicable or lam >= lower.value)
        rows.append({"R": R, "lambda1_exterior": lam,
                     "half_drift_bound": lower.value if lower.applicable
                     else None, "pass": ok})
        prev = lam
    rows.append({"check": "essential spectrum empty",
                 "pass": rep.unbounded})
    return {"table": rows, "unbounded": rep.unbounded}, None


def _repro_soliton_audit():
    from .soliton import audit_soliton
    rows = []
    for name in ("gaussian-shrinker-2-0.5", "euclidean-steady-3"):
        a = audit_soliton(preset(name))
        ok = (a.sc_verdict == "Yes" and a.feller_verdict == "Yes"
              and a.basic_eq_residual < 1e-8 and a.scalar_lower_bound_ok
              and a.gradient_estimate_ok
              and a.volume_finite in (True, None))
        rows.append({"preset": name, "pass": ok, **a.to_dict()})
    return {"table": rows}, None


_REPRO_FUNCS = {"feller-alpha-table": _repro_feller_alpha,
                "stoch-incomplete-model": _repro_stoch_incomplete,
                "discrete-spectrum-alpha": _repro_discrete_spectrum,
                "soliton-audit": _repro_soliton_audit}


def cmd_reproduce(args):
    ids = REPRODUCE_IDS if args.example_id == "all" else (args.example_id,)
    for ex in ids:
        if ex not in _REPRO_FUNCS:
            raise WmlError(f"unknown example id {ex!r}; "
                           f"choose from {', '.join(REPRODUCE_IDS)} or all")
    status = EXIT_OK
    for ex in ids:
        results, _plots = _REPRO_FUNCS[ex]()
        all_pass = all(row.get("pass", True) for row in results["table"])
        results["all_pass"] = all_pass
        if args.csv and ex == "feller-alpha-table":
            _write_table(args.csv, ("alpha", "m", "feller", "pass"),
                         [(r["alpha"], r["m"], r["feller"], r["pass"])
                          for r in results["table"]])
        _emit(Report(f"reproduce {ex}", None, clean(results)), args)
        if not all_pass:
            status = EXIT_MISMATCH
    return status


# --------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="wml",
        description="weighted model manifold laboratory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="SC and Feller verdicts")
    _add_manifold_args(p)
    p.add_argument("--out", help="write the JSON report to this file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("spectrum", help="eigenvalue estimates")
    _add_manifold_args(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--ball", type=float, help="lambda1 of the ball B_R")
    mode.add_argument("--exterior", type=float,
                      help="lambda1 of the exterior of B_R")
    mode.add_argument("--ess", help="comma-separated exterior radii sweep")
    p.add_argument("--atol", type=float, default=1e-6,
                   help="exhaustion tolerance for exterior eigenvalues")
    p.add_argument("--csv", help="CSV + gnuplot output for sweeps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("simulate", help="Monte Carlo diffusion")
    _add_manifold_args(p)
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--r0", type=float, default=1.0,
                   help="common starting radius")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--outer", type=float, default=50.0,
                   help="outer absorbing radius")
    p.add_argument("--hit-radius", type=float, default=None,
                   help="estimate E[e^(-lam tau)] for hitting B_R instead")
    p.add_argument("--hit-lambda", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="regenerate reference tables")
    p.add_argument("example_id",
                   help=f"one of {', '.join(REPRODUCE_IDS)} or 'all'")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None):
    threads = os.environ.get("WML_THREADS")
    if threads:
        try:
            import numba
            numba.set_num_threads(max(1, int(threads)))
        except (ImportError, ValueError):
            pass
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (WmlError, OSError) as exc:
        print(f"wml: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
