"""Command-line interface.

``mimocoord run`` executes an experiment config and writes the result CSV
(exit 0 on full success, 2 when some rows failed, 1 on config errors);
``mimocoord report`` renders sum-rate figures from a result CSV.
"""

import argparse
import dataclasses
import os
import sys

from . import benchcli, report
from .coord import AlgorithmId
from .errors import MimocoordError, ParseError, ValidationError


def _build_parser():
    parser = argparse.ArgumentParser(prog="mimocoord",
                                     description="MIMO interference coordination benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an experiment sweep and emit CSV")
    runp.add_argument("--config", required=True, help="experiment config file")
    runp.add_argument("--out", help="output CSV path (overrides config)")
    runp.add_argument("--seed", type=int, help="master seed (overrides config)")
    runp.add_argument("--workers", type=int, default=1, help="parallel workers")
    runp.add_argument("--algo", help="comma-separated algorithm list (overrides config)")
    runp.add_argument("--iters", help="comma-separated iteration counts (overrides config)")

    repp = sub.add_parser("report", help="render figures from a result CSV")
    repp.add_argument("--csv", required=True, help="result CSV from 'run'")
    repp.add_argument("--outdir", help="figure directory (default: CSV's directory)")
    return parser


def _load_spec(args):
    with open(args.config) as handle:
        spec = benchcli.parse_experiment(handle.read())
    overrides = {}
    if args.out:
        overrides["output_path"] = args.out
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.algo:
        overrides["algos"] = tuple(AlgorithmId.parse(a) for a in args.algo.split(","))
    if args.iters:
        overrides["iteration_list"] = tuple(int(t) for t in args.iters.split(","))
    return dataclasses.replace(spec, **overrides) if overrides else spec


def _cmd_run(args):
    try:
        spec = _load_spec(args)
    except (ParseError, ValidationError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    failures = []
    rows = benchcli.run_experiment(spec, workers=args.workers, failure_log=failures)
    if not rows:
        print("every grid point failed; no CSV written", file=sys.stderr)
        for failure in failures:
            print(f"  {failure}", file=sys.stderr)
        return 2
    benchcli.emit_csv(rows, spec.output_path)
    print(benchcli.summarize(rows))
    print(f"wrote {len(rows)} rows to {spec.output_path}")
    if failures:
        print(f"{len(failures)} grid points failed:", file=sys.stderr)
        for failure in failures:
            print(f"  {failure}", file=sys.stderr)
        return 2
    return 0


def _cmd_report(args):
    try:
        rows = benchcli.read_csv(args.csv)
        outdir = args.outdir
        if outdir is None:
            outdir = os.path.dirname(os.path.abspath(args.csv))
        written = report.render_figures(rows, outdir)
    except (MimocoordError, OSError, ValueError, KeyError) as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_report(args)


if __name__ == "__main__":
    sys.exit(main())
