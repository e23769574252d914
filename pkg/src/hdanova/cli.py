"""Command line interface: ``hdanova test|simulate|bandwidth|diagnose-variance``.

Exit status is 0 on success (``test``: H0 not rejected), 3 when ``test``
rejects, and 2 for invalid input or arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from typing import Sequence

from .bandwidth import best_band, default_grid, evaluate_grid, select_h
from .bootstrap import TestConfig, run_test
from .errors import HdAnovaError, InvalidArgument
from .harness import default_experiments, emit_report, load_experiments, simulate, run_real
from .kernel import KernelSpec
from .panel import demean, load_panel
from .statistic import BandConfig
from .variance import component_hac, default_scale, second_order_residuals, theta_hat

EXIT_REJECT = 3
EXIT_ERROR = 2


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("HDANOVA_THREADS")
    if env is None or env.strip() == "":
        return 1
    try:
        n = int(env)
    except ValueError:
        raise InvalidArgument(f"HDANOVA_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise InvalidArgument("HDANOVA_THREADS must be >= 1")
    return n


def _band(args) -> BandConfig | None:
    if args.B is None and args.B1 is None:
        return None
    if args.B is None or args.B1 is None:
        raise InvalidArgument("give both --B and --B1, or neither")
    return BandConfig(args.B, args.B1)


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_test(args) -> int:
    band = _band(args)
    config = TestConfig(band=band, H=args.H, kernel=KernelSpec(args.kernel),
                        boot_count=args.boot_count, alpha=args.alpha, seed=args.seed,
                        auto_bandwidth=band is None, center=not args.no_center)
    if args.periods is not None:
        report = run_real(args.input, args.periods, config)
    else:
        report = run_test(load_panel(args.input), config)
    _dump(report.to_dict(timing=args.timing))
    return EXIT_REJECT if report.reject else 0


def cmd_simulate(args) -> int:
    threads = _threads(args.threads)
    if args.config is not None:
        experiments = load_experiments(args.config, seed=args.seed, parallelism=threads)
    else:
        experiments = default_experiments(seed=args.seed, parallelism=threads)
    rows = simulate(experiments, fast=args.fast, timing=args.timing)
    text = emit_report(rows, args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0


def cmd_bandwidth(args) -> int:
    panel = load_panel(args.input)
    grid = default_grid(panel.t_min, args.beta)
    band, objective = best_band(evaluate_grid(panel, grid))
    _, residuals = demean(panel)
    H = select_h(second_order_residuals(residuals, band))
    _dump({"B": band.B, "B1": band.B1, "H": H, "objective": objective})
    return 0


def cmd_diagnose(args) -> int:
    panel = load_panel(args.input)
    band = BandConfig(args.B, args.B1).clamped(panel.t_min)
    k = args.group - 1
    if not 0 <= k < panel.K:
        raise InvalidArgument(f"--group must lie in 1..{panel.K}")
    _, residuals = demean(panel)
    X = residuals.groups[k]
    H = args.H if args.H is not None else select_h(2.0 * theta_hat(X, band))
    scale = args.scale if args.scale is not None else default_scale(X.shape[0], X.shape[1], band)
    est = component_hac(X, band, H, KernelSpec(args.kernel), scale)
    _dump({"value": est.value, "scale": est.scale, "H": est.H})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes; falls back to $HDANOVA_THREADS, then 1")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--fast", action="store_true",
                        help="small CI profile: R=50, U=60, d=60, T=80")
    common.add_argument("--timing", action="store_true",
                        help="include wall times (reports are then not reproducible byte for byte)")

    parser = argparse.ArgumentParser(prog="hdanova", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def band_args(p, required=False):
        p.add_argument("--B", type=int, required=required)
        p.add_argument("--B1", type=int, required=required)
        p.add_argument("--H", type=float, default=None, help="kernel width (default: automatic)")
        p.add_argument("--kernel", default="gaussian")

    p = sub.add_parser("test", parents=[common], help="run the test on a panel CSV")
    p.add_argument("input")
    band_args(p)
    p.add_argument("--periods", type=int, default=None,
                   help="treat the file as one series and split it into this many blocks")
    p.add_argument("--boot-count", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--no-center", action="store_true", help="skip pooled-mean centring")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", parents=[common], help="size/power Monte Carlo sweep")
    p.add_argument("--config", default=None, help="TOML file with [experiment.N] blocks")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bandwidth", parents=[common], help="data-driven (B, B1, H)")
    p.add_argument("input")
    p.add_argument("--beta", type=float, default=0.3)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("diagnose-variance", parents=[common], help="HAC variance of one group")
    p.add_argument("input")
    band_args(p, required=True)
    p.add_argument("--group", type=int, default=1, help="1-based group index")
    p.add_argument("--scale", type=float, default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (HdAnovaError, OSError) as exc:
        print(f"hdanova: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
