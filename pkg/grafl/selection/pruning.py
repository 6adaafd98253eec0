# grafl/selection/pruning.py
"""
Feature-dependence graph and layer pruning.

Vertices are the historical features (ids 0..h-1, earlier layers in order)
followed by the new candidates (ids h..h+k-1, candidate order). Pairs scoring
above lambda are joined; every connected component keeps its lowest id.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from grafl.core.parallel import chunk_ranges, parallel_map, resolve_workers
from grafl.schemas.config import ConfigError
from grafl.selection.supervised import mutual_information

log = structlog.get_logger()

CRITERIA = ("agreement", "mutual-information")


@dataclass(frozen=True)
class EvaluationCriterion:
    tag: str = "agreement"
    lam: float = 0.7

    def __post_init__(self) -> None:
        if self.tag not in CRITERIA:
            raise ConfigError(f"criterion: unknown criterion {self.tag!r}")
        if self.lam < 0 or (self.tag == "agreement" and self.lam > 1):
            raise ConfigError("lam: must lie in [0, 1] for the agreement criterion")


def agreement_score(x: np.ndarray, y: np.ndarray) -> float:
    """Fraction of positions holding the same bin; 1.0 for empty vectors."""
    x = np.asarray(x)
    y = np.asarray(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    if len(x) == 0:
        return 1.0
    return float(np.count_nonzero(x == y)) / len(x)


def _one_hot(cols: np.ndarray, b: int) -> sparse.csc_matrix:
    return sparse.csc_matrix((cols == b).astype(np.float64))


def pairwise_agreement(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(a x b) agreement between the columns of A and the columns of B (integer bins)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    rows = A.shape[0]
    out = np.zeros((A.shape[1], B.shape[1]))
    if rows == 0:
        out[:] = 1.0
        return out
    if A.size == 0 or B.size == 0:
        return out
    top = min(int(A.max()), int(B.max()))
    for b in range(max(0, min(int(A.min()), int(B.min()))), top + 1):
        out += (_one_hot(A, b).T @ _one_hot(B, b)).toarray()
    return out / rows


def _pair_scores(new: np.ndarray, others: np.ndarray, crit: EvaluationCriterion, lo: int, hi: int) -> np.ndarray:
    block = new[:, lo:hi]
    if crit.tag == "agreement":
        return pairwise_agreement(block, others)
    return np.array([[mutual_information(block[:, i], others[:, j]) for j in range(others.shape[1])]
                     for i in range(block.shape[1])]).reshape(block.shape[1], others.shape[1])


@dataclass(frozen=True)
class FeatureDependenceGraph:
    n_hist: int
    n_new: int
    weights: sparse.csr_matrix  # symmetric, zero diagonal
    labels: np.ndarray  # component id per vertex

    @property
    def size(self) -> int:
        return self.n_hist + self.n_new

    def edges(self) -> list[tuple[int, int, float]]:
        upper = sparse.triu(self.weights, k=1).tocoo()
        return sorted(zip(upper.row.tolist(), upper.col.tolist(), upper.data.tolist()))

    def representatives(self) -> np.ndarray:
        """Lowest vertex id of every component."""
        first = np.full(int(self.labels.max()) + 1 if self.size else 0, self.size, dtype=np.int64)
        np.minimum.at(first, self.labels, np.arange(self.size))
        return np.sort(first)

    def retained_new(self) -> list[int]:
        return [int(v) - self.n_hist for v in self.representatives() if v >= self.n_hist]


def dependence_graph(
    new_cols: np.ndarray,
    hist_cols: Optional[np.ndarray],
    crit: EvaluationCriterion,
    workers: Optional[int] = None,
) -> FeatureDependenceGraph:
    """Score every new column against the historical ones and the other new ones."""
    new = np.asarray(new_cols)
    rows = new.shape[0]
    hist = np.zeros((rows, 0)) if hist_cols is None else np.asarray(hist_cols)
    h, k = hist.shape[1], new.shape[1]
    others = np.hstack([hist, new])
    if k == 0:
        return FeatureDependenceGraph(h, 0, sparse.csr_matrix((h, h)), np.arange(h, dtype=np.int64))

    ranges = chunk_ranges(k, resolve_workers(workers), min_chunk=16)
    blocks = parallel_map(lambda r: _pair_scores(new, others, crit, r[0], r[1]), ranges, resolve_workers(workers))
    scores = np.vstack(blocks)

    new_ids = np.arange(h, h + k)
    scores[np.arange(k), new_ids] = 0.0
    ii, jj = np.nonzero(scores > crit.lam)
    w = scores[ii, jj]
    W = sparse.coo_matrix((w, (new_ids[ii], jj)), shape=(h + k, h + k)).tocsr()
    W = W.maximum(W.T).tocsr()
    _, labels = connected_components(W, directed=False)
    return FeatureDependenceGraph(h, k, W, labels.astype(np.int64))


def prune_layer(
    new_cols: np.ndarray,
    hist_cols: Optional[np.ndarray],
    crit: EvaluationCriterion,
    workers: Optional[int] = None,
) -> list[int]:
    """Indices (ascending) of the new columns that survive pruning."""
    graph = dependence_graph(new_cols, hist_cols, crit, workers)
    kept = graph.retained_new()
    log.info(
        "layer_pruned",
        candidates=graph.n_new,
        history=graph.n_hist,
        dependence_edges=int(graph.weights.nnz // 2),
        retained=len(kept),
        criterion=crit.tag,
        lam=crit.lam,
    )
    return kept
