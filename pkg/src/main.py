"""
DelaySSM — Command-line entry point.
Subcommands: spectrum | ssm | predict | simulate, each driven by one YAML run config.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from colorama import Fore, Style

from src.cli.commands import RunContext, cmd_predict, cmd_simulate, cmd_spectrum, cmd_ssm
from src.cli.outputs import print_status
from src.cli.run_config import load_run_config
from src.core.config import settings
from src.core.errors import DelaySsmError
from src.infra.logging_config import bind_run, setup_logging

logger = logging.getLogger(__name__)

COMMANDS = {
    "spectrum": cmd_spectrum,
    "ssm": cmd_ssm,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delay-ssm",
        description="Reduced-order models of delay differential equations via spectral submanifolds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    help_text = {
        "spectrum": "chain spectrum, discretization convergence and Hopf loci",
        "ssm": "compute and persist the SSM expansion with its ROM report",
        "predict": "backbones, limit cycles, forced responses and tori from the ROM",
        "simulate": "reference DDE / chain / ROM forward simulations",
    }
    for name, text in help_text.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--order", type=int, help="SSM expansion order (odd, >= 3)")
        p.add_argument("--grid-n", type=int, dest="grid_n", help="chain grid count N (overrides discretization.N)")
        p.add_argument("--omega-n", type=int, dest="omega_n", help="forcing-frequency grid size")
        p.add_argument("--threads", type=int, help="worker threads for per-parameter fan-out")
        if name == "predict":
            p.add_argument("--validate", action="store_true", help="cross-check predictions by simulation")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(level=settings.LOG_LEVEL, log_file=settings.LOG_FILE, json_format=settings.LOG_JSON)
    bind_run(args.command, "-")

    started = time.monotonic()
    try:
        config = load_run_config(args.config)
        bind_run(args.command, config.name)
        ctx = RunContext.create(
            config,
            out=args.out,
            order=args.order,
            grid_n=args.grid_n,
            omega_n=args.omega_n,
            threads=args.threads,
            validate=getattr(args, "validate", False),
        )
        print(f"\n{Style.BRIGHT}delay-ssm {args.command}{Style.RESET_ALL}: {config.name} -> {ctx.out}\n")
        written = COMMANDS[args.command](ctx)
    except DelaySsmError as e:
        print_status("FAIL", type(e).__name__, str(e))
        logger.error(f"{args.command} failed: {e}", extra={"props": {"context": repr(e.context)}})
        return e.exit_code

    duration = time.monotonic() - started
    print(f"\n{Fore.GREEN}Done{Style.RESET_ALL} in {duration:.2f}s, {len(written)} files written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
