# grafl/services/harness.py
"""
Evaluation protocols: link prediction, link classification, node
classification and across-graph transfer. Every random draw comes from a
``numpy.random.default_rng(seed)``, so a run is reproducible from its seed.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import structlog

from grafl.core.graph import Graph
from grafl.core.io import atomic_write
from grafl.schemas.config import LearnConfig
from grafl.services.classifiers import predict, total_auc, train_classifier
from grafl.services.learner import extract, learn

log = structlog.get_logger()

PAIR_OPERATORS = ("mean", "product", "weighted-l1", "weighted-l2")


class SamplingError(ValueError):
    """A split or negative sample cannot be drawn from the graph."""


@dataclass(frozen=True)
class TaskDataset:
    kind: str  # "node" | "edge" | "edge-pair"
    examples: np.ndarray  # element ids, or (k x 2) node pairs
    labels: np.ndarray
    train_mask: np.ndarray
    positives: Optional[np.ndarray] = None
    negatives: Optional[np.ndarray] = None

    @property
    def test_mask(self) -> np.ndarray:
        return ~self.train_mask


# ---------- Splits ----------
def _stratified_mask(labels: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros(len(labels), dtype=bool)
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        mask[idx[: int(round(fraction * len(idx)))]] = True
    return mask


def _pair_keys(g: Graph, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if not g.directed:
        a, b = np.minimum(a, b), np.maximum(a, b)
    return a * g.n + b


def _removal_set(g: Graph, k: int, rng: np.random.Generator, keep_connected: bool) -> np.ndarray:
    order = rng.permutation(g.m)
    if not keep_connected:
        return np.sort(order[:k])
    deg = g.out_degree() + g.in_degree() if g.directed else g.out_degree()
    deg = deg.astype(np.int64).copy()
    removed = []
    for e in order:
        if len(removed) == k:
            break
        s, d = int(g.src[e]), int(g.dst[e])
        if s == d or deg[s] <= 1 or deg[d] <= 1:
            continue
        deg[s] -= 1
        deg[d] -= 1
        removed.append(int(e))
    if len(removed) < k:
        raise SamplingError(f"cannot remove {k} edges without isolating a node (managed {len(removed)})")
    return np.sort(np.array(removed, dtype=np.int64))


def sample_non_edges(g: Graph, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct node pairs (u != v) that are not edges of ``g``, as a (k x 2) array."""
    n = g.n
    total = n * (n - 1) if g.directed else n * (n - 1) // 2
    existing = np.unique(_pair_keys(g, g.src, g.dst)[g.src != g.dst])
    available = total - len(existing)
    if available < k:
        raise SamplingError(f"graph too small: {available} non-adjacent pairs for {k} negatives")
    if k == 0:
        return np.zeros((0, 2), dtype=np.int64)

    if available <= 4 * k:
        if g.directed:
            a, b = np.nonzero(~np.eye(n, dtype=bool))
        else:
            a, b = np.triu_indices(n, k=1)
        keys = a.astype(np.int64) * n + b
        free = ~np.isin(keys, existing)
        a, b = a[free], b[free]
        pick = np.sort(rng.choice(len(a), size=k, replace=False))
        return np.column_stack([a[pick], b[pick]]).astype(np.int64)

    chosen: dict[int, tuple[int, int]] = {}
    while len(chosen) < k:
        a = rng.integers(0, n, size=2 * (k - len(chosen)))
        b = rng.integers(0, n, size=len(a))
        keys = _pair_keys(g, a, b)
        ok = (a != b) & ~np.isin(keys, existing)
        for u, v, key in zip(a[ok].tolist(), b[ok].tolist(), keys[ok].tolist()):
            if key in chosen:
                continue
            chosen[key] = (u, v) if g.directed else (min(u, v), max(u, v))
            if len(chosen) == k:
                break
    return np.array(list(chosen.values()), dtype=np.int64)


def make_linkpred_split(
    g: Graph,
    fraction: float = 0.5,
    seed: int = 0,
    keep_connected: bool = False,
    train_fraction: float = 0.5,
) -> tuple[Graph, TaskDataset]:
    """
    Remove floor(fraction * m) random edges (the positives), sample as many
    non-edges of the original graph (the negatives). ``keep_connected`` only
    removes edges whose endpoints keep at least one edge.
    """
    if g.m < 2:
        raise SamplingError(f"link prediction needs at least 2 edges, graph has {g.m}")
    if not 0.0 < fraction < 1.0:
        raise SamplingError("fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    k = int(np.floor(fraction * g.m))
    if k == 0:
        raise SamplingError(f"fraction {fraction} removes no edge of {g.m}")
    removed = _removal_set(g, k, rng, keep_connected)
    positives = np.column_stack([g.src[removed], g.dst[removed]]).astype(np.int64)
    negatives = sample_non_edges(g, k, rng)
    train_g = g.drop_edges(removed)

    pairs = np.vstack([positives, negatives])
    labels = np.concatenate([np.ones(k, dtype=np.int64), np.zeros(k, dtype=np.int64)])
    mask = _stratified_mask(labels, train_fraction, rng)
    log.info("linkpred_split", removed=k, negatives=k, training_edges=train_g.m, seed=seed)
    return train_g, TaskDataset("edge-pair", pairs, labels, mask, positives, negatives)


# ---------- Pair features ----------
def pair_features(x_i: np.ndarray, x_j: np.ndarray, op: str) -> np.ndarray:
    """mean (x_i + x_j) / 2, product x_i * x_j, weighted-l1 |x_i - x_j|, weighted-l2 (x_i - x_j)^2."""
    x_i = np.asarray(x_i, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    if x_i.shape != x_j.shape:
        raise ValueError(f"shape mismatch: {x_i.shape} != {x_j.shape}")
    if op == "mean":
        return (x_i + x_j) / 2.0
    if op == "product":
        return x_i * x_j
    if op == "weighted-l1":
        return np.abs(x_i - x_j)
    if op == "weighted-l2":
        return (x_i - x_j) ** 2
    raise ValueError(f"unknown pair operator: {op!r}")


def _score(features: np.ndarray, labels: np.ndarray, train: np.ndarray, classifier: str, seed: int) -> float:
    model = train_classifier(features[train], labels[train], classifier, seed=seed)
    return total_auc(predict(model, features[~train]), labels[~train], model.classes)


# ---------- Experiments ----------
def run_linkpred_experiment(
    g: Graph,
    cfg: LearnConfig,
    graph_name: str = "graph",
    fraction: float = 0.5,
    seed: int = 0,
    operators: Sequence[str] = PAIR_OPERATORS,
    classifier: str = "logistic",
    keep_connected: bool = False,
) -> list[dict]:
    """Node features learned on the training graph, combined per pair, one AUC per pair operator."""
    train_g, data = make_linkpred_split(g, fraction, seed, keep_connected)
    X, _ = learn(train_g, cfg.model_copy(update={"kind": "node"}))
    rows = []
    for op in operators:
        feats = pair_features(X.values[data.examples[:, 0]], X.values[data.examples[:, 1]], op)
        score = _score(feats, data.labels, data.train_mask, classifier, seed)
        rows.append({"graph": graph_name, "operator": op, "auc": score})
        log.info("linkpred_scored", graph=graph_name, operator=op, auc=round(score, 4))
    return rows


def run_linkclass_experiment(
    g: Graph,
    edge_labels: np.ndarray,
    cfg: LearnConfig,
    graph_name: str = "graph",
    seed: int = 0,
    train_fraction: float = 0.5,
    operators: Sequence[str] = PAIR_OPERATORS,
    classifier: str = "logistic",
) -> list[dict]:
    """Edge labels predicted from learned edge features (operator ``edge``) and from node-pair features."""
    edge_labels = np.asarray(edge_labels)
    if len(edge_labels) != g.m:
        raise ValueError(f"expected {g.m} edge labels, got {len(edge_labels)}")
    rng = np.random.default_rng(seed)
    labeled = np.flatnonzero(edge_labels >= 0)
    y = edge_labels[labeled]
    mask = _stratified_mask(y, train_fraction, rng)

    X_edge, _ = learn(g, cfg.model_copy(update={"kind": "edge"}))
    score = _score(X_edge.values[labeled], y, mask, classifier, seed)
    rows = [{"graph": graph_name, "operator": "edge", "auc": score}]

    X_node, _ = learn(g, cfg.model_copy(update={"kind": "node"}))
    src, dst = g.src[labeled], g.dst[labeled]
    for op in operators:
        feats = pair_features(X_node.values[src], X_node.values[dst], op)
        rows.append({"graph": graph_name, "operator": op, "auc": _score(feats, y, mask, classifier, seed)})
    log.info("linkclass_scored", graph=graph_name, rows=len(rows))
    return rows


def run_nodeclass_experiment(
    g: Graph,
    labels: np.ndarray,
    cfg: LearnConfig,
    graph_name: str = "graph",
    seed: int = 0,
    train_fraction: float = 0.5,
    classifiers: Sequence[str] = ("rsm", "logistic"),
) -> list[dict]:
    labels = np.asarray(labels)
    if len(labels) != g.n:
        raise ValueError(f"expected {g.n} node labels, got {len(labels)}")
    rng = np.random.default_rng(seed)
    labeled = np.flatnonzero(labels >= 0)
    y = labels[labeled]
    mask = _stratified_mask(y, train_fraction, rng)
    X, _ = learn(g, cfg.model_copy(update={"kind": "node"}))
    rows = []
    for name in classifiers:
        score = _score(X.values[labeled], y, mask, name, seed)
        rows.append({"graph": graph_name, "classifier": name, "auc": score})
        log.info("nodeclass_scored", graph=graph_name, classifier=name, auc=round(score, 4))
    return rows


def run_transfer_experiment(
    train: tuple[Graph, np.ndarray],
    tests: Sequence[tuple[str, Graph, np.ndarray]],
    cfg: LearnConfig,
    classifier: str = "logistic",
    train_fraction: float = 1.0,
    seed: int = 0,
) -> list[dict]:
    """
    Learn functions on the fully observed training graph, fit one classifier on
    (a ``train_fraction`` of) its labels, then extract the same functions on each
    unlabeled test graph and score it.
    """
    g, labels = train
    labels = np.asarray(labels)
    X, fs = learn(g, cfg)
    labeled = np.flatnonzero(labels >= 0)
    if train_fraction < 1.0:
        rng = np.random.default_rng(seed)
        labeled = labeled[_stratified_mask(labels[labeled], train_fraction, rng)]
    model = train_classifier(X.values[labeled], labels[labeled], classifier, seed=seed)

    rows = []
    for name, test_g, test_labels in tests:
        test_labels = np.asarray(test_labels)
        X_test = extract(test_g, fs, cfg.workers)
        keep = test_labels >= 0
        score = total_auc(predict(model, X_test.values[keep]), test_labels[keep], model.classes)
        rows.append({"graph": name, "classifier": classifier, "auc": score})
        log.info("transfer_scored", graph=name, auc=round(score, 4), features=len(fs))
    return rows


# ---------- Reports ----------
def write_report(path: str | Path, rows: list[dict], columns: Sequence[str], meta: Optional[dict] = None) -> None:
    """CSV report plus a ``<report>.meta.json`` sidecar echoing seeds and configuration."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    with atomic_write(path) as fh:
        fh.write(buf.getvalue())
    if meta is not None:
        with atomic_write(f"{path}.meta.json") as fh:
            fh.write(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
