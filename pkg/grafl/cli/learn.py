# grafl/cli/learn.py
import argparse
from pathlib import Path

import structlog

from grafl.cli.common import (
    add_graph_args,
    add_learn_args,
    add_output_args,
    finish_run,
    input_paths,
    learn_config,
    load_graph,
    merged_values,
    read_labels,
    write_matrix,
)
from grafl.schemas.functions import save_functions
from grafl.services.learner import Learner

log = structlog.get_logger()


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    cfg = learn_config(values)  # validated before any computation
    g = load_graph(args)
    labels = read_labels(args.labels, g, cfg.kind)

    learner = Learner(cfg)
    X, fs = learner.fit(g, labels)
    save_functions(fs, args.out_funcs)
    try:
        write_matrix(args.out_feats, X.values, X.names(), args.format)
    except Exception:
        # no function file without its matrix
        Path(args.out_funcs).unlink(missing_ok=True)
        raise
    log.info("learn_outputs_written", functions=args.out_funcs, features=args.out_feats, shape=list(X.shape))
    finish_run(
        args, "learn", values, input_paths(args, "graph", "attrs", "edge_attrs", "labels"),
        [args.out_feats, args.out_funcs], learner.timings,
    )


def register(subparsers) -> None:
    p = subparsers.add_parser("learn", help="Learn relational feature functions and the feature matrix")
    add_graph_args(p)
    add_learn_args(p)
    add_output_args(p)
    p.add_argument("--labels", help="Labels ('element_id label') for supervised selection")
    p.add_argument("--out-funcs", dest="out_funcs", required=True, help="Function file (JSON)")
    p.add_argument("--out-feats", dest="out_feats", required=True, help="Feature matrix file")
    p.set_defaults(func=run)
