# grafl/cli/history.py
import argparse
import sys

import structlog

from grafl.db.session import open_session
from grafl.schemas.config import ConfigError
from grafl.services.run_registry import list_runs

log = structlog.get_logger()


def run(args: argparse.Namespace) -> None:
    db = open_session(args.db)
    if db is None:
        raise ConfigError("db: no run registry configured (set GRAFL_DB_URL or pass --db)")
    try:
        runs = list_runs(db, command=args.command_filter, limit=args.limit)
        sys.stdout.write("created_at,run_id,command,seed,total_seconds,fingerprint\n")
        for r in runs:
            sys.stdout.write(
                f"{r.created_at.isoformat()},{r.run_id},{r.command},{'' if r.seed is None else r.seed},"
                f"{r.total_seconds:.6f},{r.fingerprint}\n"
            )
    finally:
        db.close()
    log.info("history_listed", runs=len(runs))


def register(subparsers) -> None:
    p = subparsers.add_parser("history", help="List runs recorded in the run registry")
    p.add_argument("--db", help="Registry URL (default: GRAFL_DB_URL)")
    p.add_argument("--command", dest="command_filter", help="Only runs of this command")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=run)
