"""Command-line entry point.

Subcommands::

    polylike bounds    [--degrees 2,4,6,8] [--y-grid ...] [--K-grid ...]
    polylike analyze   --c1 C | --param-query Q
    polylike construct --c1 C | --param-query Q [--variant V] [--theta T,...] [--levels 0,1,2]
    polylike geometry  [--theta T,...]
    polylike search    --param-query superstable:3 | cascade:6 | fibonacci:8[@lo,hi]

Flags given on the command line override the ``--config`` JSON file.  The
output directory defaults to ``$POLYLIKE_OUT_DIR`` or the working directory.

Exit codes: 0 when every check passed, 2 when at least one reference check
failed, 1 on configuration or IO errors and on inputs that violate a command's
precondition (for example ``construct`` with an escaping parameter).
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .errors import PolylikeError
from .reports import COMMANDS, FORMATS, ConfigError, RunConfig, default_out_dir, read_config_file
from .builder import VARIANTS

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc


def _formats(text: str) -> tuple:
    out = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in out if x not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {bad}; choose from {FORMATS}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--degree", type=int, help="even degree of z^l + c1 (default 2)")
    common.add_argument("--c1", type=float, help="real parameter c1")
    common.add_argument("--param-query", dest="param_query",
                        help="solve for c1: superstable:P, cascade:D or fibonacci:D, optionally @lo,hi")
    common.add_argument("--variant", choices=VARIANTS, help="range construction (default picked per level)")
    common.add_argument("--theta", dest="thetas", type=_floats, help="comma separated angles in (0, pi/2]")
    common.add_argument("--levels", type=_ints, help="comma separated level indices")
    common.add_argument("--samples", type=int, help="initial boundary samples")
    common.add_argument("--tol", type=float, help="tolerance for residual checks")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (default $POLYLIKE_OUT_DIR or .)")
    common.add_argument("--format", dest="formats", type=_formats,
                        help="comma separated subset of json,csv,svg (default json)")
    common.add_argument("--degrees", type=_ints, help="degree grid for the bound tables")
    common.add_argument("--y-grid", dest="y_grid", type=_floats, help="y grid for the bound tables")
    common.add_argument("--K-grid", dest="K_grid", type=_floats, help="K grid for the bound and Z tables")
    common.add_argument("--max-period", dest="max_period", type=int, help="largest renormalization period sought")
    common.add_argument("--depth", type=int, help="number of nice levels / closest returns")
    common.add_argument("--jobs", type=int, help="worker processes for per-level work")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(
        prog="polylike",
        description="Real bounds and polynomial-like restrictions of z^l + c1.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "tables of K*_l(y), its limit and A_*(K)",
        "analyze": "classify a parameter and measure space ratios per level",
        "construct": "build ranges, check the pullback containment and assemble the maps",
        "geometry": "intersection points, spiral overlays and root reports",
        "search": "solve a parameter query",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


CONFIG_KEYS = ("degree", "c1", "param_query", "variant", "thetas", "levels", "samples", "tol", "out_dir",
               "formats", "degrees", "y_grid", "K_grid", "max_period", "depth", "jobs")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then the flags."""
    data = {"out_dir": default_out_dir()}
    if args.config:
        data.update(read_config_file(args.config))
    data.update({k: getattr(args, k) for k in CONFIG_KEYS if getattr(args, k) is not None})
    return RunConfig.from_mapping(data)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        report = COMMANDS[args.command](config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PolylikeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value!r} (expected {c.expected!r}, tol {c.tol:g})")
    for e in report.errors:
        print(f"note  {e}")
    for a in report.artifacts:
        print(f"wrote {config.out_dir}/{a}")
    if not report.usable:
        return EXIT_ERROR
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
