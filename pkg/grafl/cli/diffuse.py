# grafl/cli/diffuse.py
import argparse
import time

import numpy as np

from grafl.cli.common import add_graph_args, finish_run, input_paths, load_graph, merged_values
from grafl.core.io import read_matrix_csv, write_matrix_csv
from grafl.features.diffusion import diffuse_values
from grafl.schemas.config import DiffusionConfig


def run(args: argparse.Namespace) -> None:
    values = merged_values(args)
    settings = {k: values[k] for k in ("theta", "iterations", "tol", "attach") if values.get(k) is not None}
    method = values.get("method") or values.get("diffusion")
    if method:
        settings["method"] = method
    cfg = DiffusionConfig.parse(settings)
    g = load_graph(args)
    X, names = read_matrix_csv(args.feats)

    start = time.perf_counter()
    smoothed = diffuse_values(g, args.kind, X, cfg, args.workers)
    diffused_names = [f"diffuse[{cfg.method}]({name})" for name in names]
    if cfg.attach == "replace":
        out, out_names = smoothed, diffused_names
    else:
        out, out_names = np.hstack([X, smoothed]), names + diffused_names
    write_matrix_csv(args.out_feats, out, out_names)
    finish_run(
        args, "diffuse", values, input_paths(args, "graph", "feats"), [args.out_feats],
        {"diffusion": time.perf_counter() - start},
    )


def register(subparsers) -> None:
    p = subparsers.add_parser("diffuse", help="Smooth the columns of a feature matrix over the graph")
    add_graph_args(p)
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--feats", required=True, help="Feature matrix CSV")
    p.add_argument("--kind", choices=["node", "edge"], default="node")
    p.add_argument("--method", choices=["row-stochastic", "laplacian"])
    p.add_argument("--theta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--attach", choices=["replace", "append"])
    p.add_argument("--out-feats", dest="out_feats", required=True)
    p.add_argument("--manifest")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=run)
