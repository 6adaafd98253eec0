# grafl/cli/extract.py
import argparse
import time

from grafl.cli.common import add_graph_args, add_output_args, finish_run, input_paths, load_graph, merged_values, write_matrix
from grafl.schemas.functions import load_functions
from grafl.services.learner import extract


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    fs = load_functions(args.funcs)
    g = load_graph(args)
    start = time.perf_counter()
    X = extract(g, fs, args.workers)
    write_matrix(args.out_feats, X.values, X.names(), args.format)
    finish_run(
        args, "extract", values, input_paths(args, "graph", "attrs", "edge_attrs", "funcs"),
        [args.out_feats], {"extract": time.perf_counter() - start},
    )


def register(subparsers) -> None:
    p = subparsers.add_parser("extract", help="Evaluate a learned function file on a graph")
    add_graph_args(p)
    add_output_args(p)
    p.add_argument("--funcs", required=True, help="Function file written by learn")
    p.add_argument("--out-feats", dest="out_feats", required=True, help="Feature matrix file")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=run)
