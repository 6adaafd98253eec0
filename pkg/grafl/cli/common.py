# grafl/cli/common.py
"""Flags, config-file merging, graph loading and manifests shared by the commands."""
from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import structlog
from dotenv import dotenv_values

from grafl.config import get_settings
from grafl.core.graph import Graph
from grafl.core.io import atomic_write, load_attributes, load_edge_list, load_labels, write_matrix_csv, write_matrix_triplets
from grafl.db.session import open_session
from grafl.schemas.config import ALL_OPERATORS, ConfigError, LearnConfig
from grafl.schemas.manifest import RunManifest
from grafl.services.run_registry import record_run

log = structlog.get_logger()

# flag dest -> LearnConfig field
LEARN_KEYS = {
    "kind": "kind",
    "operators": "operators",
    "criterion": "criterion",
    "lam": "lam",
    "alpha": "alpha",
    "layers": "max_layers",
    "ell": "hops",
    "families": "families",
    "combinators": "combinators",
    "selection": "selection",
    "beta": "beta",
    "budget": "budget",
    "workers": "workers",
}
DIFFUSION_KEYS = ("diffusion", "theta", "iterations", "tol", "attach")
# config-file spellings that differ from flag dests
FILE_ALIASES = {"lambda": "lam", "hops": "ell", "max_layers": "layers", "method": "diffusion"}


def csv_list(text: str) -> list[str]:
    return [part.strip() for part in str(text).split(",") if part.strip()]


# ---------- Flags ----------
def add_graph_args(p: argparse.ArgumentParser, flag: str = "--graph", required: bool = True) -> None:
    p.add_argument(flag, dest="graph", required=required, help="Edge list: 'src dst [weight]' per line")
    p.add_argument("--directed", action="store_true", help="Treat the edge list as directed")
    p.add_argument("--weighted", action="store_true", help="Read a third column as edge weight")
    p.add_argument("--attrs", help="Node attribute file (header row, 'node v1 v2 ...')")
    p.add_argument("--edge-attrs", dest="edge_attrs", help="Edge attribute file (header row, 'src dst v1 ...')")


def add_learn_args(p: argparse.ArgumentParser) -> None:
    """Learning flags; defaults are None so config files and settings can fill them."""
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--kind", choices=["node", "edge"])
    p.add_argument("--operators", help=f"Comma list from {','.join(ALL_OPERATORS)}")
    p.add_argument("--p", type=float, help="weighted-lp exponent")
    p.add_argument("--sigma", type=float, help="rbf bandwidth")
    p.add_argument("--criterion", choices=["agreement", "mutual-information"])
    p.add_argument("--lambda", dest="lam", type=float, help="Dependence threshold")
    p.add_argument("--alpha", type=float, help="Logarithmic binning fraction")
    p.add_argument("--layers", type=int, help="Maximum number of layers")
    p.add_argument("--ell", type=int, help="Neighbourhood distance")
    p.add_argument("--families", help="Comma list of base-feature families")
    p.add_argument("--combinators", help="Comma list from plus,times")
    p.add_argument("--selection", choices=["unsupervised", "supervised"])
    p.add_argument("--beta", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--diffusion", choices=["none", "row-stochastic", "laplacian"])
    p.add_argument("--theta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--attach", choices=["replace", "append"])
    p.add_argument("--workers", type=int, help="Worker count (GRAFL_WORKERS overrides)")
    p.add_argument("--seed", type=int, default=None)


def add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "triplets"], default="csv", help="Feature matrix format")
    p.add_argument("--manifest", help="Manifest path (default: <output>.manifest.json)")


# ---------- Config merging ----------
def merged_values(args: argparse.Namespace) -> dict[str, Any]:
    """Built-in defaults < config file < flags < GRAFL_WORKERS."""
    settings = get_settings()
    values: dict[str, Any] = {"alpha": settings.DEFAULT_ALPHA, "lam": settings.DEFAULT_LAMBDA, "seed": 0}
    path = getattr(args, "config", None)
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config: file not found: {path}")
        for key, raw in dotenv_values(path).items():
            key = key.strip().lower().replace("-", "_")
            values[FILE_ALIASES.get(key, key)] = raw
    for key, value in vars(args).items():
        if value is not None and key not in ("func", "config"):
            values[key] = value
    if settings.WORKERS is not None:
        values["workers"] = settings.WORKERS
    return values


def learn_config(values: Mapping[str, Any], **overrides: Any) -> LearnConfig:
    data: dict[str, Any] = {}
    for key, field in LEARN_KEYS.items():
        if values.get(key) is not None:
            data[field] = values[key]
    data.update(overrides)
    for field in ("operators", "families", "combinators"):
        if isinstance(data.get(field), str):
            data[field] = csv_list(data[field])
    if "operators" in data:
        data["operators"] = [
            {"tag": tag, **({"p": values["p"]} if tag == "weighted-lp" and values.get("p") is not None else {}),
             **({"sigma": values["sigma"]} if tag == "rbf" and values.get("sigma") is not None else {})}
            for tag in data["operators"]
        ]
    method = values.get("diffusion")
    if method and method != "none":
        diffusion: dict[str, Any] = {"method": method}
        for key in DIFFUSION_KEYS[1:]:
            if values.get(key) is not None:
                diffusion[key] = values[key]
        data["diffusion"] = diffusion
    return LearnConfig.parse(data)


def seed_of(values: Mapping[str, Any]) -> int:
    try:
        return int(values.get("seed") or 0)
    except (TypeError, ValueError):
        raise ConfigError(f"seed: not an integer: {values.get('seed')!r}") from None


# ---------- Inputs ----------
def load_graph(args: argparse.Namespace, path: Optional[str] = None) -> Graph:
    g = load_edge_list(path or args.graph, directed=args.directed, weighted=args.weighted)
    if getattr(args, "attrs", None):
        g = load_attributes(args.attrs, g, "node")
    if getattr(args, "edge_attrs", None):
        g = load_attributes(args.edge_attrs, g, "edge")
    return g


def read_labels(path: Optional[str], g: Graph, kind: str) -> Optional[np.ndarray]:
    return load_labels(path, g, kind) if path else None


def input_paths(args: argparse.Namespace, *names: str) -> list[str]:
    out = []
    for name in names:
        value = getattr(args, name, None)
        if isinstance(value, list):
            out += [str(v) for v in value]
        elif value:
            out.append(str(value))
    return out


# ---------- Outputs ----------
def write_matrix(path: str, values: np.ndarray, names: list[str], fmt: str) -> None:
    if fmt == "triplets":
        write_matrix_triplets(path, values)
    else:
        write_matrix_csv(path, values, names)


def finish_run(
    args: argparse.Namespace,
    command: str,
    values: Mapping[str, Any],
    inputs: list[str],
    outputs: list[str],
    timings: Optional[Mapping[str, float]] = None,
    run_id: Optional[str] = None,
) -> RunManifest:
    """Write the manifest next to the primary output and record it in the registry when one is configured."""
    config = {k: v for k, v in values.items() if k not in ("graph", "manifest", "seed")}
    run_id = run_id or structlog.contextvars.get_contextvars().get("run_id")
    manifest = RunManifest(
        command=command,
        config=json.loads(json.dumps(config, default=str)),
        inputs=inputs,
        seed=seed_of(values),
        timings=dict(timings or {}),
        outputs=list(outputs),
        **({"run_id": run_id} if run_id else {}),
    )
    target = getattr(args, "manifest", None) or (f"{outputs[0]}.manifest.json" if outputs else None)
    if target:
        with atomic_write(target) as fh:
            fh.write(manifest.model_dump_json(indent=2) + "\n")

    db = open_session()
    if db is None:
        log.info("run_registry_skipped", reason="GRAFL_DB_URL not set")
        return manifest
    try:
        record_run(db, manifest)
    finally:
        db.close()
    return manifest
