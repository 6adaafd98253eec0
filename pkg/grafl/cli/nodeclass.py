# grafl/cli/nodeclass.py
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
from grafl.services.harness import run_nodeclass_experiment, write_report


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values, kind="node")
    seed = seed_of(values)
    g = load_graph(args)
    labels = read_labels(args.labels, g, "node")
    start = time.perf_counter()
    rows = run_nodeclass_experiment(
        g, labels, cfg,
        graph_name=args.name or args.graph,
        seed=seed,
        train_fraction=args.train_fraction,
        classifiers=csv_list(args.classifiers),
    )
    meta = {"seed": seed, "train_fraction": args.train_fraction, "config": cfg.model_dump(mode="json")}
    write_report(args.out, rows, ("graph", "classifier", "auc"), meta)
    finish_run(args, "nodeclass", values, input_paths(args, "graph", "labels"), [args.out],
               {"experiment": time.perf_counter() - start})


def register(subparsers) -> None:
    p = subparsers.add_parser("nodeclass", help="Node classification with learned features")
    add_graph_args(p)
    add_learn_args(p)
    p.add_argument("--labels", required=True, help="Node labels: 'node label' per line")
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.5)
    p.add_argument("--classifiers", default="rsm,logistic", help="Comma list from rsm,logistic")
    p.add_argument("--name", help="Graph name in the report")
    p.add_argument("--out", required=True, help="CSV report: graph,classifier,auc")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
