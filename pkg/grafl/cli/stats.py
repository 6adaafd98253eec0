# grafl/cli/stats.py
import argparse
import json
import sys

from grafl.cli.common import finish_run, merged_values
from grafl.core.io import atomic_write, read_matrix_csv
from grafl.features.matrix import matrix_stats


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    X, _ = read_matrix_csv(args.feats)
    report = json.dumps(matrix_stats(X).as_dict(), indent=2, sort_keys=True)
    if args.out:
        with atomic_write(args.out) as fh:
            fh.write(report + "\n")
    else:
        sys.stdout.write(report + "\n")
    finish_run(args, "stats", values, [args.feats], [args.out] if args.out else [])


def register(subparsers) -> None:
    p = subparsers.add_parser("stats", help="Density and storage report of a feature matrix")
    p.add_argument("--feats", required=True, help="Feature matrix CSV")
    p.add_argument("--out", help="JSON report (default: stdout)")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
