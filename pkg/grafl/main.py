import argparse
import sys
from typing import Optional, Sequence
from uuid import uuid4

import structlog

from grafl.cli import bench, diffuse, extract, history, learn, linkclass, linkpred, nodeclass, stats, transfer
from grafl.config import get_settings
from grafl.logging_config import configure_logging

log = structlog.get_logger()

COMMANDS = (learn, extract, diffuse, linkpred, linkclass, nodeclass, transfer, stats, bench, history)


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grafl", description="Deep relational graph features")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit status."""
    args = create_parser().parse_args(argv)
    configure_logging(get_settings().LOG_LEVEL)

    # Bind per-run context
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(run_id=uuid4().hex, command=args.command)

    log.info("run_start")
    try:
        args.func(args)
    except Exception as exc:
        log.exception("run_failed")
        sys.stderr.write(f"grafl {args.command}: error: {exc}\n")
        return 1
    log.info("run_end")
    return 0
