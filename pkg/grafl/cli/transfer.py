# grafl/cli/transfer.py
import argparse
import time

from grafl.cli.common import (
    add_graph_args,
    add_learn_args,
    finish_run,
    input_paths,
    learn_config,
    load_graph,
    merged_values,
    read_labels,
    seed_of,
)
from grafl.schemas.config import ConfigError
from grafl.services.harness import run_transfer_experiment, write_report


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values)
    seed = seed_of(values)
    if len(args.test_graph) != len(args.test_labels):
        raise ConfigError("test-labels: give one labels file per --test-graph")

    g = load_graph(args)
    train = (g, read_labels(args.labels, g, cfg.kind))
    tests = []
    for path, labels_path in zip(args.test_graph, args.test_labels):
        test_g = load_graph(args, path)
        tests.append((path, test_g, read_labels(labels_path, test_g, cfg.kind)))

    start = time.perf_counter()
    rows = run_transfer_experiment(train, tests, cfg, args.classifier, args.train_fraction, seed)
    meta = {"seed": seed, "train_fraction": args.train_fraction, "config": cfg.model_dump(mode="json")}
    write_report(args.out, rows, ("graph", "classifier", "auc"), meta)
    finish_run(args, "transfer", values, input_paths(args, "graph", "labels", "test_graph", "test_labels"),
               [args.out], {"experiment": time.perf_counter() - start})


def register(subparsers) -> None:
    p = subparsers.add_parser("transfer", help="Learn on one graph, extract and score on others")
    add_graph_args(p)
    add_learn_args(p)
    p.add_argument("--labels", required=True, help="Labels of the training graph")
    p.add_argument("--test-graph", dest="test_graph", action="append", required=True, help="Repeatable")
    p.add_argument("--test-labels", dest="test_labels", action="append", required=True,
                   help="Repeatable, one per --test-graph")
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=1.0,
                   help="Share of training labels the classifier sees")
    p.add_argument("--classifier", choices=["logistic", "rsm"], default="logistic")
    p.add_argument("--out", required=True, help="CSV report: graph,classifier,auc")
    p.add_argument("--manifest")
    p.set_defaults(func=run)
