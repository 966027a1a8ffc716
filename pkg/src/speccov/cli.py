"""Command-line interface.

Subcommands:
  estimate   one-shot estimation from a delimited data file
  simulate   run a replicated experiment from a YAML config
  cv         cross-validate the threshold tau on a data file
  rates      print the theory threshold / radius / rate table

On failure a machine-readable line ``ERROR {json}`` is written to stderr
and the exit code is nonzero.
"""

import argparse
import json
import sys

import numpy as np

from . import harness, shrinkage, spectral
from .shrinkage import CvConfig, PdSoftConfig


def _load_matrix(path):
    with open(path) as fh:
        head = fh.read(4096)
    delim = "," if "," in head else None
    return np.loadtxt(path, delimiter=delim, ndmin=2)


def _write_matrix(mat, path):
    if path is None or path == "-":
        np.savetxt(sys.stdout, mat, delimiter=",")
    else:
        np.savetxt(path, mat, delimiter=",")


def _cmd_estimate(args):
    Y = _load_matrix(args.input)
    tuning = {"tau": args.tau, "U": args.u, "lambda": args.barrier}
    est = harness._run_estimator(args.estimator, tuning, Y, Y.T @ Y / len(Y))
    _write_matrix(est.matrix, args.output)
    return 0


def _cmd_simulate(args):
    spec = harness.load_spec(args.config)
    if args.replications is not None:
        spec = harness.ExperimentSpec(
            scenario=spec.scenario, estimators=spec.estimators,
            replications=args.replications, cv=spec.cv, cv_rule=spec.cv_rule,
            output=spec.output)
    records = harness.run_experiment(spec)
    out = args.output or spec.output
    if out:
        harness.write_csv(records, out)
    else:
        sys.stdout.write(harness.records_to_csv(records))
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(harness.summary_to_json(harness.summarize(records)))
    failures = sum(1 for r in records if r.error is not None)
    if failures:
        print(f"warning: {failures} estimator failures recorded", file=sys.stderr)
    return 0


def _cmd_cv(args):
    Y = _load_matrix(args.input)
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
    else:
        grid = np.geomspace(1e-3, 2.0, 40).tolist()
    cfg = CvConfig(num_splits=args.splits, tau_grid=grid, seed=args.seed)
    tau_hat, Q = shrinkage.cross_validate_tau(Y, args.u, cfg, rule=args.rule)
    print(f"tau_hat,{tau_hat}")
    for t, q in zip(grid, Q):
        print(f"{t},{q}")
    return 0


def _cmd_rates(args):
    cfg = spectral.SpectralConfig(U=args.u, R=args.r, T=args.t,
                                  beta=args.beta, gamma=args.gamma)
    print("n,p,tau,admissible,u_star,rate")
    for n in args.n:
        for p in args.p:
            tau = spectral.tau_threshold(cfg, n, p)
            adm = spectral.admissible(cfg, n, p)
            try:
                ustar = spectral.spectral_radius_star(args.r, args.gamma, n, p)
                ustar_s = f"{ustar:.6g}"
            except spectral.PreAsymptoticError:
                ustar_s = ""
            rate = spectral.theoretical_rate(args.s, args.r, args.t,
                                             args.beta, args.q, n, p)
            print(f"{n},{p},{tau:.6g},{str(adm).lower()},{ustar_s},{rate:.6g}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="speccov",
                                 description="Covariance estimation from noisy observations")
    sub = ap.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate from a data file")
    est.add_argument("--input", required=True,
                     help="delimited numeric matrix, rows = observations")
    est.add_argument("--estimator", default="sps", choices=harness.ESTIMATOR_TAGS)
    est.add_argument("--u", type=float, default=1.0, help="probe radius U")
    est.add_argument("--tau", type=float, default=0.25)
    est.add_argument("--barrier", type=float, default=1e-4,
                     help="log-det barrier weight")
    est.add_argument("--output", default=None, help="output path (default stdout)")
    est.set_defaults(func=_cmd_estimate)

    sim = sub.add_parser("simulate", help="run an experiment config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--replications", type=int, default=None)
    sim.add_argument("--output", default=None, help="CSV path (overrides config)")
    sim.add_argument("--summary", default=None, help="optional JSON summary path")
    sim.set_defaults(func=_cmd_simulate)

    cv = sub.add_parser("cv", help="cross-validate tau on a data file")
    cv.add_argument("--input", required=True)
    cv.add_argument("--u", type=float, default=1.0)
    cv.add_argument("--grid", default=None, help="comma-separated tau grid")
    cv.add_argument("--splits", type=int, default=100)
    cv.add_argument("--seed", type=int, default=0)
    cv.add_argument("--rule", default="sps", choices=("sps", "soft", "hard", "pds"))
    cv.set_defaults(func=_cmd_cv)

    rates = sub.add_parser("rates", help="print theory tables")
    rates.add_argument("--n", type=int, nargs="+", required=True)
    rates.add_argument("--p", type=int, nargs="+", required=True)
    rates.add_argument("--u", type=float, default=1.0)
    rates.add_argument("--r", type=float, default=1.0)
    rates.add_argument("--t", type=float, default=1.0)
    rates.add_argument("--beta", type=float, default=1.0)
    rates.add_argument("--gamma", type=float, default=1.5)
    rates.add_argument("--s", type=float, default=1.0, help="sparsity of the truth")
    rates.add_argument("--q", type=float, default=0.0)
    rates.set_defaults(func=_cmd_rates)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print("ERROR " + json.dumps({"type": type(exc).__name__,
                                     "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
