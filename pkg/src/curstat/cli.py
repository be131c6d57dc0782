"""Command-line interface: ``curstat {ci,bandwidth,simulate,regress}``.

Every output starts with ``#`` lines echoing the resolved configuration.
Exit status is 0 on success, 2 for input or configuration errors and 3 when
an estimator fails.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import default_workers
from .boot import METHODS, BandwidthRule, CiRequest, confidence_band, select_bandwidth
from .data import Grid, RngSpec, read_sample_csv
from .errors import EstimatorError, InputError, InvalidDatum
from .regression import (DEFAULT_EPS, GRID_SIZE, bootstrap_sse_ci, pilot_interval,
                         read_regression_csv, sse_estimate)
from .sim import MODELS, get_model, run_coverage_experiment, run_regression_experiment

EXIT_INPUT = 2
EXIT_ESTIMATOR = 3

LONG_RECIPE = """\
full-scale recipe (--long): N=5000 runs, B=1000 replicates and the grid
t=0.02,0.04,...,2.  On one core a uniform2 studentized run at n=1000 takes
several hours; --workers spreads the runs over processes.  Examples:

  curstat simulate --model uniform2 --n 1000 --long --workers 8 \\
      --h 0.502377 --output unif_fixed.csv
  curstat simulate --model exp_trunc2 --n 1000 --long --auto \\
      --bias true_beta --output exp_true_bias.csv
  curstat simulate --model reg_model1 --n 1000 --long --output reg1_1000.csv
"""


# --------------------------------------------------------------------------
# argument parsing helpers


def _float_pair(text):
    parts = text.replace(":", ",").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("need LO < HI")
    return lo, hi


def _grid(text) -> Grid:
    """``START:STOP:STEP`` or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = map(float, text.split(":"))
            return Grid.regular(start, stop, step)
        return Grid(np.array([float(v) for v in text.split(",")]))
    except (ValueError, InputError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CURSTAT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidDatum(f"CURSTAT_SEED={env!r} is not an integer") from None


def _workers(args) -> int:
    return default_workers() if args.workers is None else max(1, args.workers)


def _add_common(p):
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (falls back to $CURSTAT_SEED, then 0)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available CPUs); output does not depend on it")
    p.add_argument("--output", "-o", type=Path, default=None,
                   help="output CSV path (default: standard output)")


def _add_bandwidth(p):
    g = p.add_argument_group("bandwidth")
    g.add_argument("--h", type=float, default=None, help="fixed SMLE bandwidth")
    g.add_argument("--auto", action="store_true",
                   help="select c_opt(t) by subsampling; h = factor * c_opt * n^-exponent")
    g.add_argument("--exponent", type=float, default=0.2, help="bandwidth exponent (0.2 or 0.25)")
    g.add_argument("--factor", type=float, default=1.0, help="undersmoothing factor, e.g. 0.3333")
    g.add_argument("--m", type=int, default=None, help="subsample size (default: rule of thumb)")
    g.add_argument("--B-sub", dest="B_sub", type=int, default=500, help="number of subsamples")
    g.add_argument("--c0", type=float, default=None, help="pilot constant (default: support length)")
    g.add_argument("--c-grid", dest="c_grid", type=_float_list, default=None,
                   help="comma-separated candidate constants")
    g.add_argument("--with-replacement", action="store_true",
                   help="draw subsamples with replacement")


def _bandwidth_rule(args, n, support) -> BandwidthRule:
    if args.auto:
        return BandwidthRule.auto(c_grid=args.c_grid, m=args.m, B_sub=args.B_sub,
                                  exponent=args.exponent, factor=args.factor, c0=args.c0,
                                  replace=args.with_replacement)
    h = args.h if args.h is not None else (support[1] - support[0]) * n**-0.2
    return BandwidthRule.fixed(h)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curstat", description="Bootstrap inference for current status data.",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ci", help="pointwise confidence intervals for F0",
                       description="Pointwise confidence intervals from a time,status[,count] CSV.")
    p.add_argument("input", type=Path, help="CSV with columns time,status[,count]")
    p.add_argument("--grid", type=_grid, required=True, help="START:STOP:STEP or t1,t2,...")
    p.add_argument("--support", type=_float_pair, default=None,
                   help="support LO,HI of the inspection times (default: data range)")
    p.add_argument("--method", choices=METHODS, default="studentized")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", type=int, default=1000, help="bootstrap replicates")
    p.add_argument("--bias", choices=("none", "direct", "subsample"), default="none")
    p.add_argument("--no-boundary", action="store_true", help="disable boundary correction")
    _add_bandwidth(p)
    _add_common(p)

    p = sub.add_parser("bandwidth", help="subsampling choice of c_opt(t)")
    p.add_argument("input", type=Path)
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--support", type=_float_pair, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--B-sub", dest="B_sub", type=int, default=500)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--c-grid", dest="c_grid", type=_float_list, default=None)
    p.add_argument("--with-replacement", action="store_true")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo coverage or regression experiment",
                       epilog=LONG_RECIPE, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--model", required=True, help=f"one of {', '.join(MODELS)}")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--N", type=int, default=500, help="simulation runs")
    p.add_argument("--B", type=int, default=500, help="bootstrap replicates per run")
    p.add_argument("--grid", type=_grid, default=None, help="evaluation grid (default 0.5,1,1.5)")
    p.add_argument("--method", choices=METHODS, default="studentized")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bias", choices=("none", "true_beta", "direct", "subsample"), default="none")
    p.add_argument("--search", type=_float_pair, default=(-10.0, 10.0),
                   help="regression models: pilot search interval")
    p.add_argument("--long", action="store_true",
                   help="full-scale settings N=5000, B=1000, fine grid (hours; see below)")
    _add_bandwidth(p)
    _add_common(p)

    p = sub.add_parser("regress", help="score estimator and bootstrap CI for the regression slope")
    p.add_argument("input", type=Path, help="CSV with columns time,covariate,status")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="truncation parameter")
    p.add_argument("--search", type=_float_pair, default=None,
                   help="search interval (default: pilot scan of [-10,10] +- 2)")
    p.add_argument("--grid-size", type=int, default=GRID_SIZE)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--interval", choices=("basic", "percentile"), default="basic",
                   help="bootstrap interval type")
    _add_common(p)
    return parser


# --------------------------------------------------------------------------
# commands


def _header(config: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in config.items())


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _summary(msg: str, args):
    if args.output is not None:
        print(msg)


def cmd_ci(args) -> int:
    sample = read_sample_csv(args.input, support=args.support)
    seed = _seed(args)
    support = sample.support_or_range()
    rule = _bandwidth_rule(args, sample.n, support)
    req = CiRequest(grid=args.grid, alpha=args.alpha, B=args.B, bandwidth=rule,
                    method=args.method, bias_rule=args.bias, boundary=not args.no_boundary,
                    workers=_workers(args))
    band = confidence_band(sample, req, RngSpec(seed))
    config = {"command": "ci", "input": args.input.name, "n": sample.n,
              "support": f"{support[0]:g},{support[1]:g}", "method": args.method,
              "alpha": args.alpha, "B": args.B, "bandwidth": rule.describe(), "bias": args.bias,
              "boundary": not args.no_boundary, "seed": seed}
    _emit(band.to_csv(header=config), args.output)
    _summary(f"{len(band.t)} grid points, mean length {band.length.mean():.6g}, "
             f"{int(band.discarded.sum())} discarded replicates", args)
    return 0


def cmd_bandwidth(args) -> int:
    sample = read_sample_csv(args.input, support=args.support)
    seed = _seed(args)
    sel = select_bandwidth(sample, args.grid.points, args.c_grid, args.m, args.B_sub, args.c0,
                           RngSpec(seed).child(0), support=sample.support_or_range(),
                           replace=args.with_replacement)
    config = {"command": "bandwidth", "input": args.input.name, "n": sample.n,
              "m": args.m if args.m is not None else "default", "B_sub": args.B_sub,
              "c0": args.c0 if args.c0 is not None else "default", "seed": seed}
    lines = ["t,c_opt,flag"]
    lines += [f"{t:.10g},{c:.10g},{int(f)}" for t, c, f in
              zip(args.grid.points, sel.c_opt, sel.degenerate)]
    _emit(_header(config) + "\n".join(lines) + "\n", args.output)
    return 0


def cmd_simulate(args) -> int:
    model = get_model(args.model)
    seed = _seed(args)
    N, B = (5000, 1000) if args.long else (args.N, args.B)
    if model.is_regression:
        report = run_regression_experiment(model, args.n, N, B, args.search, args.alpha, seed,
                                           _workers(args))
        _emit(report.to_csv(), args.output)
        _summary(f"mean {report.stats['mean']:.6g}, n*var {report.stats['n_var']:.6g}, "
                 f"bootstrap coverage {report.stats['boot_cp']:.6g}", args)
        return 0
    if args.grid is not None:
        grid = args.grid
    elif args.long:
        grid = Grid.regular(0.02, 2.0, 0.02)
    else:
        grid = Grid(np.array([0.5, 1.0, 1.5]))
    rule = _bandwidth_rule(args, args.n, model.support)
    report = run_coverage_experiment(model, args.n, N, B, grid, args.method, rule, args.bias,
                                     args.alpha, seed, _workers(args))
    _emit(report.to_csv(), args.output)
    _summary(f"mean non-coverage {report.noncoverage.mean():.6g} over {len(grid)} points, "
             f"{report.failures} failed runs", args)
    return 0


def cmd_regress(args) -> int:
    sample = read_regression_csv(args.input, eps=args.eps)
    seed = _seed(args)
    search = args.search if args.search is not None else pilot_interval(sample, (-10.0, 10.0))
    fit = sse_estimate(sample, search, args.grid_size, with_profile=False)
    ci = bootstrap_sse_ci(sample, search, args.B, args.alpha, RngSpec(seed), args.grid_size,
                          _workers(args), fit=fit, interval=args.interval)
    config = {"command": "regress", "input": args.input.name, "n": sample.n, "eps": args.eps,
              "search": f"{search[0]:.10g},{search[1]:.10g}", "grid_size": args.grid_size,
              "B": args.B, "alpha": args.alpha, "interval": args.interval, "seed": seed,
              "fit_no_crossing": int(fit.no_crossing)}
    body = ("beta_hat,lower,upper,no_crossing_count\n"
            f"{fit.beta_hat:.10g},{ci.lower:.10g},{ci.upper:.10g},{ci.no_crossing}\n")
    _emit(_header(config) + body, args.output)
    return 0


COMMANDS = {"ci": cmd_ci, "bandwidth": cmd_bandwidth, "simulate": cmd_simulate,
            "regress": cmd_regress}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"curstat: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"curstat: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimatorError as exc:
        print(f"curstat: estimator failure: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR


if __name__ == "__main__":
    sys.exit(main())
