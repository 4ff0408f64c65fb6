"""Command-line entry point: ``qoverlap <subcommand> [flags]``.

Exit codes: 0 success, 2 usage/config error, 3 numeric/horizon error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .fluid import HorizonError
from .model import ConfigError, load_model

log = logging.getLogger("qoverlap")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _method_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON model config")
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--reps", type=int, default=None, help="simulation replications")
    common.add_argument("--step", type=float, default=ex.DEFAULT_STEP, help="RK4 step h")
    common.add_argument("--horizon", type=float, default=None, help="time horizon T")
    common.add_argument("--tau", type=_float_list, default=(), help="arrival times, e.g. 3,6,9")
    common.add_argument("--methods", type=_method_list, default=None,
                        help=f"comma-separated subset of {','.join(ex.METHODS)}")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--count-self", action="store_true",
                        help="include the tagged customer in her own overlap integrand")
    common.add_argument("--format", choices=("csv", "text"), default="csv")
    common.add_argument("--workers", type=int, default=1, help="simulation worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qoverlap",
                                     description="Expected overlapping time in M_t/M/n queues")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("overlap", parents=[common], help="E[O_tau] for a configured model")
    sub.add_parser("table1", parents=[common], help="multi-server table: fluid/adjusted/simulation")
    sub.add_parser("table2", parents=[common], help="infinite-server table: closed form/ODE/simulation")
    fig = sub.add_parser("figure", parents=[common], help="figure data as CSV")
    fig.add_argument("figure_id", choices=("1", "2", "3", "4"))
    fig.add_argument("--bins", type=int, default=None, help="histogram bins (figure 3)")
    sub.add_parser("converge", parents=[common], help="uniform-acceleration eta sweep")
    return parser


def _emit(text: str, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        ex.write_atomic(out / name, text)
        log.info("wrote %s", out / name)


def _spec(args, experiment: str, default_reps: int) -> ex.ExperimentSpec:
    model = load_model(args.config) if args.config else None
    methods = args.methods
    if methods is not None and len(methods) == 0:
        raise ConfigError("empty method list")
    if methods is None and experiment == "overlap" and model is not None:
        methods = ("numeric-ode",) if model.infinite else ("fluid", "adjusted")
    return ex.ExperimentSpec(
        experiment, model=model, methods=methods or (), taus=args.tau, out=args.out,
        seed=args.seed, replications=args.reps if args.reps is not None else default_reps,
        step=args.step, horizon=args.horizon, count_self=args.count_self, workers=args.workers)


def run(args) -> None:
    suffix = "csv" if args.format == "csv" else "txt"
    if args.command in ("table1", "table2", "overlap"):
        spec = _spec(args, args.command, ex.DEFAULT_REPLICATIONS)
        runner = {"table1": ex.run_table1, "table2": ex.run_table2, "overlap": ex.run_overlap}
        rows = runner[args.command](spec)
        _emit(ex.render_rows(rows, args.format), args.out, f"{args.command}.{suffix}")
    elif args.command == "figure":
        name = f"figure{args.figure_id}"
        spec = _spec(args, name, ex.DEFAULT_REPLICATIONS)
        if name == "figure3":
            for tau, hist in ex.run_figure3(spec, args.bins).items():
                _emit(hist.to_text(), args.out, f"figure3_tau{tau:g}.csv")
        else:
            _emit(ex.columns_csv(ex.run_figure_means(name, spec)), args.out, f"{name}.csv")
    elif args.command == "converge":
        spec = _spec(args, "converge", ex.CONVERGE_REPS)
        _emit(ex.records_csv(ex.run_converge(spec)), args.out, "converge.csv")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args)
    except ConfigError as e:
        print(f"qoverlap: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (HorizonError, ArithmeticError) as e:
        print(f"qoverlap: numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
