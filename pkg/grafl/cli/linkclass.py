# grafl/cli/linkclass.py
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
    read_labels,
    seed_of,
)
from grafl.services.harness import PAIR_OPERATORS, run_linkclass_experiment, write_report


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values)
    seed = seed_of(values)
    g = load_graph(args)
    labels = read_labels(args.labels, g, "edge")
    start = time.perf_counter()
    rows = run_linkclass_experiment(
        g, labels, cfg,
        graph_name=args.name or args.graph,
        seed=seed,
        train_fraction=args.train_fraction,
        operators=csv_list(args.pair_operators),
        classifier=args.classifier,
    )
    meta = {"seed": seed, "train_fraction": args.train_fraction, "config": cfg.model_dump(mode="json")}
    write_report(args.out, rows, ("graph", "operator", "auc"), meta)
    finish_run(args, "linkclass", values, input_paths(args, "graph", "labels"), [args.out],
               {"experiment": time.perf_counter() - start})


def register(subparsers) -> None:
    p = subparsers.add_parser("linkclass", help="Link classification from labeled edges")
    add_graph_args(p)
    add_learn_args(p)
    p.add_argument("--labels", required=True, help="Edge labels: 'src dst label' per line")
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.5)
    p.add_argument("--pair-operators", dest="pair_operators", default=",".join(PAIR_OPERATORS))
    p.add_argument("--classifier", choices=["logistic", "rsm"], default="logistic")
    p.add_argument("--name", help="Graph name in the report")
    p.add_argument("--out", required=True, help="CSV report: graph,operator,auc")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
