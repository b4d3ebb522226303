"""
Batch front door: ``noetherq <command> [--model NAME|PATH] [flags]``.

Exit status is 0 when every check passed, 1 when a check failed and 2 for input or
usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path

from .conf import conf
from .exceptions import NoetherqError
from .models import builtin_models, load_model
from .pipelines import (
    RunOptions,
    cmd_derive,
    cmd_noether,
    cmd_reproduce_paper,
    cmd_verify_classical,
    cmd_verify_quantum,
)

logger = logging.getLogger(conf.APP_NAME)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMANDS = {
    "derive": lambda model, options, out: cmd_derive(model, options),
    "noether": lambda model, options, out: cmd_noether(model, options),
    "verify-classical": cmd_verify_classical,
    "verify-quantum": cmd_verify_quantum,
    "reproduce-paper": cmd_reproduce_paper,
}


def _split(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _floats(text: str) -> list[float]:
    return [float(item) for item in _split(text)]


def _ints(text: str) -> list[int]:
    """``0,2,3`` or an inclusive range ``0..4``."""
    if ".." in text:
        start, _, stop = text.partition("..")
        return list(range(int(start), int(stop) + 1))
    return [int(item) for item in _split(text)]


def _basis_entry(text: str) -> tuple[str, list[str]]:
    coord, sep, terms = text.partition("=")
    if not sep or not coord.strip():
        raise argparse.ArgumentTypeError(f"expected COORD=TERM[,TERM...], got {text!r}")
    return coord.strip(), _split(terms)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--model",
        default="bateman",
        help=f"model file path or built-in name ({', '.join(builtin_models())})",
    )
    common.add_argument("--seed", type=int, default=conf.DEFAULT_SEED)
    common.add_argument("--out", type=Path, default=Path(conf.OUT_DIR))
    common.add_argument("--log-level", default=None)
    common.add_argument("--gamma", type=float, help="override the damping parameter")
    common.add_argument("--basis0", type=_split, help="ansatz terms of the time component")
    common.add_argument(
        "--basis",
        type=_basis_entry,
        action="append",
        metavar="COORD=TERMS",
        help="ansatz terms of one coordinate component; repeat per coordinate",
    )
    common.add_argument("--initial", type=_floats, help="positions then velocities")
    common.add_argument("--t0", type=float)
    common.add_argument("--t1", type=float)
    common.add_argument("--h", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--grid-n", type=int)
    common.add_argument("--box", type=float, help="grid half width in oscillator units")
    common.add_argument("--stencil", type=int, choices=(2, 4))
    common.add_argument("--modes", type=_ints)
    common.add_argument("--times", type=_floats)
    common.add_argument(
        "--cn", action="store_true", help="cross-check with Crank-Nicolson propagation"
    )

    parser = argparse.ArgumentParser(
        prog="noetherq",
        description="Conserved charges of time-dependent Lagrangians and their quantization.",
    )
    parser.add_argument("--version", action="version", version=conf.APP_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def options_from_args(args: argparse.Namespace) -> RunOptions:
    return RunOptions(
        seed=args.seed,
        gamma=args.gamma,
        basis0=args.basis0,
        basis=dict(args.basis) if args.basis else None,
        initial=args.initial,
        t0=args.t0,
        t1=args.t1,
        h=args.h,
        tol=args.tol,
        grid_n=args.grid_n,
        box=args.box,
        stencil=args.stencil,
        modes=args.modes,
        times=args.times,
        cn=args.cn,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level or conf.LOG_LEVEL, format=conf.LOG_FORMAT)

    try:
        options = options_from_args(args)
        model = load_model(args.model)
        report = COMMANDS[args.command](model, options, args.out)
    except (NoetherqError, ValueError) as e:
        logger.debug("Input error", exc_info=True)
        print(f"noetherq {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    path = report.write(args.out)
    summary = report.summary()
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    status = "passed" if report.passed else f"FAILED ({', '.join(summary['failed'])})"
    print(f"{args.command} {report.model}: {summary['checks']} checks {status}; report {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
