"""Command-line front end.

Exit status: 0 on success, 2 for usage and validation errors, 1 for runtime
errors.  Stochastic subcommands take ``--seed``, defaulting to the
``WALLENIUS_SEED`` environment variable and then to 0.
"""

import argparse
import csv
import os
from pathlib import Path
import sys

from . import __version__
from .bootstrap import ideal_bootstrap, parametric_bootstrap
from .core import UrnSpec, WeightVector, pmf, pmf_oracle
from .data import (BINDINGS, PER_UNIT, SHARED, dumps_results, parse_dataset, simulate_dataset,
                   write_chain_csv, write_dataset)
from .exceptions import DomainError, WalleniusError
from .inference import evaluate_grid, fit_mle, likelihood_region, wilks_interval
from .plots import (render_errorbars, render_histogram, render_likelihood_1d, render_ternary,
                    render_trace_panel, write_svg)
from .swm import DEFAULT_STEP, SwmConfig, chain_diagnostics, credible_intervals, run_swm

SEED_ENV = "WALLENIUS_SEED"
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise _UsageError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _emit(record, out):
    text = dumps_results(record)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    return parse_dataset(args.data, binding=args.binding)


def _cmd_pmf(args):
    urn = UrnSpec(args.m)
    w = WeightVector(args.w)
    record = {"m": list(urn.counts), "x": list(args.x), "w": w, "pmf": pmf(urn, w, args.x)}
    if args.oracle:
        record["pmf_oracle"] = pmf_oracle(urn, w, args.x)
    _emit(record, args.out)


def _fit_record(dataset):
    if dataset.binding == PER_UNIT:
        return {"binding": PER_UNIT,
                "units": {u.tables[0].table_id: fit_mle(u) for u in dataset.units()}}
    return {"binding": SHARED, "mle": fit_mle(dataset), "labels": list(dataset.labels)}


def _cmd_mle(args):
    _emit(_fit_record(_load(args)), args.out)


def _cmd_wilks(args):
    dataset = _load(args)
    mle = fit_mle(dataset)
    intervals = [wilks_interval(dataset, level, mle) for level in args.level]
    _emit({"mle": mle, "intervals": intervals}, args.out)
    if args.svg:
        grid = evaluate_grid(dataset, args.grid)
        write_svg(render_likelihood_1d(grid, mle, intervals[0]), args.svg)


def _cmd_region(args):
    dataset = _load(args)
    mle = fit_mle(dataset)
    regions = likelihood_region(dataset, args.levels, args.grid, args.calibration, mle=mle,
                                zoom=not args.no_zoom)
    _emit({"mle": mle, "regions": regions}, args.out)
    if args.svg:
        write_svg(render_ternary(regions, [("ŵ", mle.w_hat)]), args.svg)


def _cmd_boot(args):
    dataset = _load(args)
    mle = fit_mle(dataset)
    if args.kind == "ideal":
        if len(dataset) != 1:
            raise DomainError("the ideal bootstrap needs a single-table dataset")
        table = dataset.tables[0]
        dist = ideal_bootstrap(table.urn, mle.w_hat, table.n)
    else:
        dist = parametric_bootstrap(dataset, mle.w_hat, args.B, args.seed)
    _emit({"mle": mle, "bootstrap": dist, "seed": args.seed}, args.out)
    if args.svg:
        write_svg(render_histogram(dist.weights_array()[:, 0], dist.masses(),
                                   reference=float(mle.w_hat[0])), args.svg)


def _swm_config(args, iterations=None, burn_in=None):
    return SwmConfig(iterations=args.iters if iterations is None else iterations,
                     burn_in=args.burnin if burn_in is None else burn_in,
                     step_scale=args.step, seed=args.seed, w0=args.w0,
                     prior_concentration=args.alpha, autotune=args.autotune)


def _cmd_swm(args):
    dataset = _load(args) if args.data else None
    if dataset is not None and dataset.binding == PER_UNIT:
        raise DomainError("swm samples one shared weight vector; use --binding shared_weights")
    config = _swm_config(args)
    chain = run_swm(dataset, config, K=args.K)
    record = {"chain": chain, "diagnostics": chain_diagnostics(chain)}
    if len(chain) >= 100:
        record["credible_intervals"] = credible_intervals(chain, args.level)
    _emit(record, args.out)
    if args.chain:
        write_chain_csv(chain, args.chain)
    if args.svg:
        write_svg(render_trace_panel(chain, args.labels), args.svg)


def _cmd_simulate(args):
    if len(args.m) != args.K or len(args.w) != args.K:
        raise DomainError(f"--m and --w must have {args.K} components")
    urn = UrnSpec(args.m)
    dataset = simulate_dataset(urn, WeightVector(args.w), args.n, args.T, args.seed, args.binding)
    if args.out:
        write_dataset(dataset, args.out)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(("table_id", "category", "m", "x"))
        for t in dataset.tables:
            for label, m, x in zip(dataset.labels, t.urn.counts, t.outcome.x):
                writer.writerow((t.table_id, label, m, x))


def _summary_rows(dataset, mle, dist, cred):
    rows = []
    for k, label in enumerate(dataset.labels):
        rows.append((label, mle.w_hat[k], dist.se[k], cred.posterior_mean[k],
                     cred.lower[k], cred.upper[k]))
    return rows


def _cmd_report(args):
    dataset = _load(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = {"labels": list(dataset.labels), "n_tables": len(dataset), "seed": args.seed}
    files = []

    if dataset.binding == PER_UNIT:
        units = []
        for unit in dataset.units():
            chain = run_swm(unit, _swm_config(args))
            cred = credible_intervals(chain, args.level)
            units.append((unit.tables[0].table_id, cred.posterior_mean, cred))
            report.setdefault("units", {})[unit.tables[0].table_id] = {
                "mle": fit_mle(unit), "credible_intervals": cred, "accept_rate": chain.accept_rate}
        write_svg(render_errorbars(units, dataset.labels), outdir / "errorbars.svg")
        files.append("errorbars.svg")
    else:
        mle = fit_mle(dataset)
        report["mle"] = mle
        if dataset.K == 2 and not mle.boundary_flag:
            interval = wilks_interval(dataset, 0.95, mle)
            report["wilks"] = interval
            grid = evaluate_grid(dataset, args.grid)
            write_svg(render_likelihood_1d(grid, mle, interval), outdir / "likelihood.svg")
            files.append("likelihood.svg")
        chain = run_swm(dataset, _swm_config(args))
        cred = credible_intervals(chain, args.level)
        report["swm"] = {"chain": chain, "credible_intervals": cred,
                         "diagnostics": chain_diagnostics(chain)}
        if dataset.K == 3:
            regions = likelihood_region(dataset, grid_resolution=args.grid, mle=mle)
            report["regions"] = regions
            write_svg(render_ternary(regions, [("ŵ", mle.w_hat)]), outdir / "regions.svg")
            write_svg(render_ternary([], [("ŵ", mle.w_hat)], samples=chain.samples),
                      outdir / "posterior.svg")
            files += ["regions.svg", "posterior.svg"]
        dist = parametric_bootstrap(dataset, mle.w_hat, args.B, args.seed)
        report["bootstrap"] = dist
        write_svg(render_histogram(dist.weights_array()[:, 0], dist.masses(),
                                   reference=float(mle.w_hat[0])), outdir / "bootstrap.svg")
        write_svg(render_trace_panel(chain, dataset.labels), outdir / "trace.svg")
        files += ["bootstrap.svg", "trace.svg"]
        with open(outdir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("category", "w_hat", "boot_se", "post_mean", "cred_lower",
                             "cred_upper"))
            for row in _summary_rows(dataset, mle, dist, cred):
                writer.writerow([row[0]] + [f"{v:.12g}" for v in row[1:]])
        files.append("summary.csv")
    report["files"] = sorted(files + ["report.json"])
    (outdir / "report.json").write_text(dumps_results(report), encoding="utf-8")


def build_parser():
    parser = _Parser(prog="wallenius",
                     description="Wallenius noncentral hypergeometric likelihood and inference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p, required=True):
        p.add_argument("--data", required=required, help="dataset CSV (table_id,category,m,x)")
        p.add_argument("--binding", choices=BINDINGS, default=SHARED)

    def out_arg(p):
        p.add_argument("--out", help="JSON output file (default: stdout)")

    def seed_arg(p):
        p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                       help=f"random seed (default: ${SEED_ENV} or 0)")

    def swm_args(p):
        p.add_argument("--iters", type=int, default=20_000, help="retained iterations")
        p.add_argument("--burnin", type=int, default=None, help="default: 10%% of --iters")
        p.add_argument("--step", type=float, default=DEFAULT_STEP)
        p.add_argument("--w0", type=_floats, default=None)
        p.add_argument("--alpha", type=float, default=1.0, help="Dirichlet concentration")
        p.add_argument("--autotune", action="store_true")
        p.add_argument("--level", type=float, default=0.95)

    p = sub.add_parser("pmf", help="probability of one outcome")
    p.add_argument("--m", type=_ints, required=True)
    p.add_argument("--x", type=_ints, required=True)
    p.add_argument("--w", type=_floats, required=True)
    p.add_argument("--oracle", action="store_true", help="also run the exact recursion")
    out_arg(p)
    p.set_defaults(func=_cmd_pmf)

    p = sub.add_parser("mle", help="maximum likelihood weights")
    data_args(p)
    out_arg(p)
    p.set_defaults(func=_cmd_mle)

    p = sub.add_parser("wilks", help="likelihood-ratio interval (2 categories)")
    data_args(p)
    p.add_argument("--level", type=float, action="append", default=None)
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--svg")
    out_arg(p)
    p.set_defaults(func=_cmd_wilks)

    p = sub.add_parser("region", help="likelihood-ratio regions (3 categories)")
    data_args(p)
    p.add_argument("--levels", type=_floats, default=(0.95, 0.5, 0.05))
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--calibration", choices=("chi2", "relative"), default="chi2")
    p.add_argument("--no-zoom", action="store_true")
    p.add_argument("--svg")
    out_arg(p)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("boot", help="bootstrap the MLE")
    data_args(p)
    p.add_argument("--kind", choices=("ideal", "parametric"), default="parametric")
    p.add_argument("--B", type=int, default=200)
    seed_arg(p)
    p.add_argument("--svg")
    out_arg(p)
    p.set_defaults(func=_cmd_boot)

    p = sub.add_parser("swm", help="posterior sampling")
    data_args(p, required=False)
    p.add_argument("--K", type=int, default=None, help="categories when sampling the prior")
    swm_args(p)
    seed_arg(p)
    p.add_argument("--chain", help="chain CSV output")
    p.add_argument("--labels", type=lambda s: s.split(","), default=None)
    p.add_argument("--svg", help="trace plot output")
    out_arg(p)
    p.set_defaults(func=_cmd_swm)

    p = sub.add_parser("simulate", help="simulate a dataset")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--m", type=_ints, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", type=_floats, required=True)
    p.add_argument("--T", type=int, default=1)
    p.add_argument("--binding", choices=BINDINGS, default=SHARED)
    seed_arg(p)
    p.add_argument("--out", help="dataset CSV output (default: stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="full analysis with figures")
    data_args(p)
    p.add_argument("--outdir", required=True)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--B", type=int, default=100)
    swm_args(p)
    seed_arg(p)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "level", 0) is None:
            args.level = [0.95]
        args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WalleniusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
