# grafl/features/diffusion.py
"""
Feature diffusion.

row-stochastic:  x(t) = D^-1 A x(t-1), elements without out-neighbours keep their value
laplacian:       x(t) = (1 - theta) L x(t-1) + theta x(0),  L = I - D^-1/2 A D^-1/2

Edges diffuse over the line-graph relation of their neighbourhoods. Each column
converges on its own: a step whose largest change is below ``tol`` is not
applied and ends that column's iterations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np
import structlog
from scipy import sparse

from grafl.core.graph import Graph
from grafl.core.parallel import parallel_map, resolve_workers
from grafl.features.binning import log_bin
from grafl.features.functions import ChainStep, DiffusionStep
from grafl.features.matrix import FeatureMatrix
from grafl.schemas.config import ConfigError, DiffusionConfig

log = structlog.get_logger()


class _DiffusionParams(Protocol):
    method: str
    theta: float
    iterations: int
    tol: float


@dataclass(frozen=True)
class DiffusionOperator:
    method: str
    matrix: sparse.csr_matrix
    isolated: np.ndarray


def diffusion_operator(g: Graph, kind: str, method: str) -> DiffusionOperator:
    def build():
        if method == "row-stochastic":
            A = g.step_matrix(kind, "out")
            deg = np.diff(A.indptr).astype(np.float64)
            inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
            return DiffusionOperator(method, (sparse.diags(inv) @ A).tocsr(), deg == 0)
        if method == "laplacian":
            S = g.step_matrix(kind, "all")
            deg = np.asarray(S.sum(axis=1)).ravel()
            inv_sqrt = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
            norm = sparse.diags(inv_sqrt) @ S @ sparse.diags(inv_sqrt)
            L = (sparse.identity(S.shape[0], format="csr") - norm).tocsr()
            return DiffusionOperator(method, L, deg == 0)
        raise ConfigError(f"diffusion.method: unknown method {method!r}")
    return g.cached(("diffusion", kind, method), build)


def diffuse_column(op: DiffusionOperator, x0: np.ndarray, params: _DiffusionParams) -> np.ndarray:
    if not 0.0 <= params.theta <= 1.0:
        raise ConfigError("diffusion.theta: must lie in [0, 1]")
    x0 = np.asarray(x0, dtype=np.float64)
    x = x0.copy()
    if len(x) == 0:
        return x
    for _ in range(int(params.iterations)):
        if op.method == "row-stochastic":
            new = np.asarray(op.matrix @ x).ravel()
            new[op.isolated] = x[op.isolated]
        else:
            new = (1.0 - params.theta) * np.asarray(op.matrix @ x).ravel() + params.theta * x0
        if np.max(np.abs(new - x)) < params.tol:
            break
        x = new
    return x


def step_from_config(cfg: DiffusionConfig) -> DiffusionStep:
    return DiffusionStep(method=cfg.method, theta=cfg.theta, iterations=cfg.iterations, tol=cfg.tol)


def diffuse_values(
    g: Graph, kind: str, values: np.ndarray, cfg: DiffusionConfig, workers: Optional[int] = None
) -> np.ndarray:
    """Diffuse every column of a raw (rows x cols) array."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != g.size(kind):
        raise ValueError(f"matrix has {values.shape[0]} rows, graph has {g.size(kind)} {kind}s")
    op = diffusion_operator(g, kind, cfg.method)
    cols = parallel_map(
        lambda j: diffuse_column(op, values[:, j], cfg), list(range(values.shape[1])), resolve_workers(workers)
    )
    return np.column_stack(cols) if cols else values.copy()


def diffuse(
    g: Graph,
    X: FeatureMatrix,
    cfg: DiffusionConfig,
    alpha: Optional[float] = None,
    workers: Optional[int] = None,
) -> FeatureMatrix:
    """
    Diffuse the columns of ``X``; ``cfg.attach`` decides between X <- X_bar and X <- [X X_bar].

    Diffused columns are re-binned with ``alpha`` when given, and their
    definitions gain a diffusion step so extraction replays them.
    """
    diffused = diffuse_values(g, X.kind, X.values, cfg, workers)
    step = ChainStep(step_from_config(cfg))
    functions = [f.extend(step) for f in X.functions]
    if alpha is not None:
        cols = [log_bin(diffused[:, j], alpha).astype(np.float64) for j in range(diffused.shape[1])]
        diffused = np.column_stack(cols) if cols else diffused
        functions = [f.with_bins(int(c.max()) + 1 if len(c) else 0) for f, c in zip(functions, cols)]
    log.info("features_diffused", method=cfg.method, columns=len(functions), attach=cfg.attach)
    if cfg.attach == "replace":
        return FeatureMatrix(X.kind, diffused, tuple(functions), X.layers)
    return FeatureMatrix(
        X.kind,
        np.hstack([X.values, diffused]),
        X.functions + tuple(functions),
        X.layers + X.layers,
    )
