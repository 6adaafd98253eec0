# grafl/cli/bench.py
import argparse
import csv
import io
import sys

from grafl.cli.common import add_learn_args, csv_list, finish_run, learn_config, merged_values, seed_of
from grafl.core.io import atomic_write
from grafl.schemas.config import ConfigError
from grafl.services.bench import BENCH_COLUMNS, run_bench


def _ints(text: str, flag: str) -> list[int]:
    try:
        return [int(float(v)) for v in csv_list(text)]
    except ValueError:
        raise ConfigError(f"{flag}: expected a comma list of integers, got {text!r}") from None


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values)
    seed = seed_of(values)
    sizes = _ints(args.sizes, "sizes")
    workers_list = _ints(args.workers_list, "workers-list") if args.workers_list else [cfg.workers or 1]

    rows = run_bench(sizes, cfg, avg_degree=args.degree, seed=seed, workers_list=workers_list)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(BENCH_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    if args.out:
        with atomic_write(args.out) as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    total = {"total": sum(r["seconds"] for r in rows)}
    finish_run(args, "bench", values, [], [args.out] if args.out else [], total)


def register(subparsers) -> None:
    p = subparsers.add_parser("bench", help="Time learning on seeded Erdos-Renyi graphs")
    add_learn_args(p)
    p.add_argument("--sizes", default="1000,10000,100000", help="Comma list of node counts")
    p.add_argument("--degree", type=float, default=10.0, help="Average degree")
    p.add_argument("--workers-list", dest="workers_list", help="Comma list; every size runs per worker count")
    p.add_argument("--out", help="CSV rows n,m,seconds,<phases>,workers (default: stdout)")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
