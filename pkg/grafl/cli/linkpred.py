# grafl/cli/linkpred.py
import argparse
import time

from grafl.cli.common import (
    add_graph_args,
    add_learn_args,
    csv_list,
    finish_run,
    input_paths,
    learn_config,
    load_graph,
    merged_values,
    seed_of,
)
from grafl.services.harness import PAIR_OPERATORS, run_linkpred_experiment, write_report


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values, kind="node")
    seed = seed_of(values)
    g = load_graph(args)
    start = time.perf_counter()
    rows = run_linkpred_experiment(
        g, cfg,
        graph_name=args.name or args.graph,
        fraction=args.fraction,
        seed=seed,
        operators=csv_list(args.pair_operators),
        classifier=args.classifier,
        keep_connected=args.keep_connected,
    )
    meta = {"seed": seed, "fraction": args.fraction, "config": cfg.model_dump(mode="json")}
    write_report(args.out, rows, ("graph", "operator", "auc"), meta)
    finish_run(args, "linkpred", values, input_paths(args, "graph"), [args.out],
               {"experiment": time.perf_counter() - start})


def register(subparsers) -> None:
    p = subparsers.add_parser("linkpred", help="Link prediction: hide edges, learn, classify pairs, report AUC")
    add_graph_args(p)
    add_learn_args(p)
    p.add_argument("--fraction", type=float, default=0.5, help="Fraction of edges removed as positives")
    p.add_argument("--pair-operators", dest="pair_operators", default=",".join(PAIR_OPERATORS))
    p.add_argument("--classifier", choices=["logistic", "rsm"], default="logistic")
    p.add_argument("--keep-connected", dest="keep_connected", action="store_true",
                   help="Never remove a node's last edge")
    p.add_argument("--name", help="Graph name in the report")
    p.add_argument("--out", required=True, help="CSV report: graph,operator,auc")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
