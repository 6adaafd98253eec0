# grafl/selection/supervised.py
"""Plug-in mutual information and greedy relevance/redundancy selection."""
from __future__ import annotations

from typing import Optional

import numpy as np
import structlog

log = structlog.get_logger()


def mutual_information(x: np.ndarray, y: np.ndarray) -> float:
    """MI in nats from the joint histogram of two discrete vectors; no bias correction."""
    x = np.asarray(x)
    y = np.asarray(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    n = len(x)
    if n == 0:
        return 0.0
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    ny = int(yi.max()) + 1
    joint = np.bincount(xi * ny + yi).astype(np.float64) / n
    joint = np.pad(joint, (0, (int(xi.max()) + 1) * ny - len(joint))).reshape(-1, ny)
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(px, py)
    return max(0.0, float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz]))))


def supervised_select(
    X: np.ndarray,
    y: np.ndarray,
    beta: float = 1.0,
    k: int = 10,
    history: Optional[np.ndarray] = None,
    min_score: Optional[float] = None,
    mask: Optional[np.ndarray] = None,
) -> list[int]:
    """
    Greedy selection maximising MI(y, x_i) - beta * sum_j MI(x_i, x_j) over the
    features already chosen (and any ``history`` columns). Without history the
    first pick is the most relevant feature. Ties go to the lower column id.

    Relevance uses the rows in ``mask`` (default: rows with label >= 0);
    redundancy uses every row. Stops at ``k`` picks, when candidates run out,
    or when the best objective is not above ``min_score``.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError("X must be (elements x features) with one label per element")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if mask is None:
        mask = y >= 0
    mask = np.asarray(mask, dtype=bool)

    n_feat = X.shape[1]
    relevance = np.array([mutual_information(X[mask, i], y[mask]) for i in range(n_feat)])
    redundancy = np.zeros(n_feat)
    if history is not None and beta > 0:
        H = np.asarray(history)
        for j in range(H.shape[1]):
            redundancy += [mutual_information(X[:, i], H[:, j]) for i in range(n_feat)]

    picked: list[int] = []
    remaining = np.ones(n_feat, dtype=bool)
    while len(picked) < k and remaining.any():
        objective = np.where(remaining, relevance - beta * redundancy, -np.inf)
        best = int(np.argmax(objective))
        if min_score is not None and objective[best] <= min_score:
            break
        picked.append(best)
        remaining[best] = False
        if beta > 0:
            redundancy += [mutual_information(X[:, i], X[:, best]) if remaining[i] else 0.0 for i in range(n_feat)]

    log.debug("supervised_selected", candidates=n_feat, picked=len(picked), beta=beta)
    return picked
