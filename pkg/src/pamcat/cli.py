"""Command-line surface.

Four subcommands tie the library together:

    green    resolvent values, Green constants and tail integrals
    phase    regime classification, single point or a CSV sweep
    mc       Monte Carlo estimators (lambda | pinned | quenched | scaling-check)
    polaron  the radial variational constant and its truncated variants

Every command prints one JSON document to stdout (sorted keys, 9 significant
digits, infinities as the string "inf") with an embedded run manifest, and
logs to stderr.  Given the same flags and seed the JSON is byte-identical
across runs and thread counts, except for the manifest's wall-clock field.
Exit codes: 0 success, 2 domain error, 3 numerical failure.
"""

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError
from .feynman_kac import (
    TAG_FIELD,
    McConfig,
    default_box_radius,
    estimate_Lambda_p,
    estimate_Lambda_p_pinned,
    sample_catalyst_field,
    scaling_identity_check,
    simulate_quenched_u,
    substream,
)
from .lattice_green import green_tail, r_d, resolvent_routes
from .params import MAX_DIMENSION, ModelParams
from .polaron import (
    P_p_full,
    P_p_truncated,
    RadialGrid,
    coupling_coefficient,
    maximize_P,
)
from .spectral import classify_regimes, hat_lambda_p, lambda_p_zero

THREADS_ENV = "PAMCAT_THREADS"


def _n_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _log(msg):
    print(msg, file=sys.stderr)


def _jsonable(x):
    """Round-trip floats through 9 significant digits; stringify non-finite."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(f"{x:.9g}")
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    return x


def _manifest(args, t0, outputs=()):
    rec = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {
        "command": args.command if args.command != "mc"
        else f"mc {args.estimator}",
        "flags": _jsonable(rec),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_clock_seconds": round(time.time() - t0, 3),
        "outputs": list(outputs),
    }


def _emit(record, args, t0, outputs=()):
    record["manifest"] = _manifest(args, t0, outputs)
    text = json.dumps(_jsonable(record), sort_keys=True, indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        _log(f"wrote {args.out}")
    print(text)


def _params(args):
    return ModelParams(d=args.d, p=args.p, kappa=args.kappa,
                       gamma=args.gamma, rho=args.rho, nu=args.nu)


def _add_param_flags(p, kappa_default=1.0):
    p.add_argument("--d", type=int, default=3, help="lattice dimension")
    p.add_argument("--p", type=int, default=1, help="moment order")
    p.add_argument("--kappa", type=float, default=kappa_default,
                   help="reactant diffusion constant")
    p.add_argument("--gamma", type=float, default=1.0, help="coupling")
    p.add_argument("--rho", type=float, default=1.0,
                   help="catalyst diffusion constant")
    p.add_argument("--nu", type=float, default=1.0,
                   help="catalyst Poisson intensity")


# ---------------------------------------------------------------- green

def cmd_green(args, t0):
    rec = {"d": args.d, "mu": args.mu}
    fourier, timedom = resolvent_routes(args.mu, args.d)
    anchor = timedom if args.mu == 0.0 else fourier
    rec["R"] = anchor
    rec["r_d"] = r_d(args.d)
    rec["diagnostics"] = {
        "fourier_route": fourier,
        "time_domain_route": timedom,
        "route_gap": abs(fourier - timedom)
        if math.isfinite(fourier) else 0.0,
    }
    if args.a is not None:
        rec["G_a"] = green_tail(args.a, args.d)
        rec["a"] = args.a
    _emit(rec, args, t0)
    return 0


# ---------------------------------------------------------------- phase

def _report_record(params, report):
    return {
        "d": params.d,
        "p": params.p,
        "ratio": report.ratio,
        "r_d": report.r_d_value,
        "strongly_catalytic": report.strongly_catalytic,
        "lambda_p_finite": report.lambda_p_finite,
        "verdict": report.intermittency_verdict.value,
        "certifying_inequalities": [list(t) for t in
                                    report.certifying_inequalities],
        "notes": list(report.notes),
    }


def _sweep_row(item):
    d, ratio, base = item
    params = ModelParams(d=d, p=base.p, kappa=base.kappa,
                         gamma=ratio * base.rho / base.p, rho=base.rho,
                         nu=base.nu)
    report = classify_regimes(params)
    return {
        "d": d,
        "ratio": f"{ratio:.9g}",
        "strongly_catalytic": report.strongly_catalytic,
        "lambda_p_finite": report.lambda_p_finite,
        "verdict": report.intermittency_verdict.value,
        "hat_lambda_p": _jsonable(hat_lambda_p(params)),
        "lambda_p_zero": _jsonable(lambda_p_zero(params)),
    }


def cmd_phase(args, t0):
    params = _params(args)
    report = classify_regimes(params)
    rec = _report_record(params, report)
    outputs = []
    if args.csv:
        # sweep the (ratio, d) grid; rows in grid order regardless of the
        # number of worker threads
        ratios = [round(0.25 * i, 9) for i in range(1, 41)]
        dims = list(range(1, MAX_DIMENSION + 1))
        items = [(d, ratio, params) for d in dims for ratio in ratios]
        n = _n_threads()
        if n > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=n) as ex:
                rows = list(ex.map(_sweep_row, items))
        else:
            rows = [_sweep_row(it) for it in items]
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        rec["sweep_rows"] = len(rows)
        outputs.append(args.csv)
        _log(f"wrote {len(rows)}-row sweep to {args.csv}")
    _emit(rec, args, t0, outputs)
    return 0


# ---------------------------------------------------------------- mc

def _estimate_record(est):
    return {
        "estimate": est.value,
        "std_error": est.std_error,
        "replicas": est.replicas_used,
        "diagnostics": dict(est.diagnostics),
    }


def cmd_mc(args, t0):
    params = _params(args)
    mc = McConfig(replicas=args.replicas, master_seed=args.seed)
    rec = {
        "params": {"d": params.d, "p": params.p, "kappa": params.kappa,
                   "gamma": params.gamma, "rho": params.rho, "nu": params.nu},
        "t": args.t,
        "seed": args.seed,
    }
    box = None
    if args.box_radius is not None:
        from .cauchy import BoxConfig, default_dt
        dt = args.dt if args.dt is not None else default_dt(params)
        box = BoxConfig(radius=args.box_radius, dt=dt)
    if args.estimator == "lambda":
        est = estimate_Lambda_p(params, args.t, mc, box=box)
        rec.update(_estimate_record(est))
    elif args.estimator == "pinned":
        est = estimate_Lambda_p_pinned(params, args.t, mc, box=box)
        rec.update(_estimate_record(est))
    elif args.estimator == "quenched":
        radius = args.box_radius if args.box_radius is not None \
            else default_box_radius(params, args.t)
        rng = substream(args.seed, TAG_FIELD, 0)
        field_ = sample_catalyst_field(params, radius, args.t, rng)
        est = simulate_quenched_u(field_, params, args.t, mc)
        rec.update(_estimate_record(est))
        rec["field"] = {"walkers": len(field_.walkers), "radius": radius}
    else:  # scaling-check
        lhs, rhs = scaling_identity_check(params, args.t, mc)
        gap = abs(lhs.value - rhs.value)
        sigma = math.hypot(lhs.std_error, rhs.std_error)
        rec["lhs"] = _estimate_record(lhs)
        rec["rhs"] = _estimate_record(rhs)
        rec["gap"] = gap
        rec["three_sigma"] = 3.0 * sigma
        rec["pass"] = bool(gap <= 3.0 * sigma or sigma == 0.0 and gap == 0.0)
    _emit(rec, args, t0)
    return 0


# ---------------------------------------------------------------- polaron

def cmd_polaron(args, t0):
    params = _params(args)
    grid = RadialGrid(r_max=args.r_max, n=args.n)
    res = maximize_P(grid=grid)
    A, B = res.coulomb_term, res.gradient_term
    full = P_p_full(params, grid=grid)
    rec = {
        "P": res.P,
        "coulomb_term": A,
        "gradient_term": B,
        "virial_residual": abs(A - 2.0 * B) / A,
        "four_sqrt_pi_P": 4.0 * math.sqrt(math.pi) * res.P,
        "iterations": res.iterations,
        "grid": list(res.grid_fingerprint),
        "coupling_coefficient": coupling_coefficient(params),
        "P_p": full["value"],
        "P_p_diagnostic": full["diagnostic_value"],
    }
    outputs = []
    if args.eps is not None or args.K is not None:
        eps = args.eps if args.eps is not None else 1e-4
        K = args.K if args.K is not None else 1e4
        rec["P_p_truncated"] = P_p_truncated(eps, K, params, grid=grid)
        rec["eps"] = eps
        rec["K"] = K
    if args.csv:
        prof = res.profile
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "f"])
            for rv, fv in zip(prof.grid.nodes(), prof.values):
                writer.writerow([f"{rv:.9g}", f"{fv:.9g}"])
        outputs.append(args.csv)
        _log(f"wrote maximizer profile to {args.csv}")
    _emit(rec, args, t0, outputs)
    return 0


# ---------------------------------------------------------------- driver

def build_parser():
    ap = argparse.ArgumentParser(
        prog="pamcat",
        description="numerical laboratory for the parabolic Anderson "
                    "equation with moving catalysts")
    ap.add_argument("--out", default=None,
                    help="also write the JSON record to this path")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("green", help="resolvent and Green constants")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--mu", type=float, default=0.0)
    g.add_argument("--a", type=float, default=None,
                   help="also report the tail integral from this time")
    g.set_defaults(func=cmd_green)

    ph = sub.add_parser("phase", help="regime classification")
    _add_param_flags(ph)
    ph.add_argument("--csv", default=None,
                    help="write a (ratio, d) sweep to this CSV path")
    ph.set_defaults(func=cmd_phase)

    m = sub.add_parser("mc", help="Monte Carlo estimators")
    m.add_argument("estimator",
                   choices=["lambda", "pinned", "quenched", "scaling-check"])
    _add_param_flags(m)
    m.add_argument("--t", type=float, default=1.0, help="time horizon")
    m.add_argument("--replicas", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--box-radius", type=int, default=None)
    m.add_argument("--dt", type=float, default=None)
    m.set_defaults(func=cmd_mc)

    po = sub.add_parser("polaron", help="radial variational constant")
    _add_param_flags(po)
    po.add_argument("--eps", type=float, default=None,
                    help="lower time-truncation of the kernel")
    po.add_argument("--K", type=float, default=None,
                    help="upper time-truncation of the kernel")
    po.add_argument("--r-max", type=float, default=20.0)
    po.add_argument("--n", type=int, default=2000)
    po.add_argument("--csv", default=None,
                    help="write the maximizer profile to this CSV path")
    po.set_defaults(func=cmd_polaron)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.time()
    try:
        return args.func(args, t0)
    except DomainError as exc:
        _log(f"domain error: {exc}")
        return 2
    except NumericalError as exc:
        _log(f"numerical error: {exc}")
        if exc.details:
            _log(f"details: {exc.details}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
