# grafl/services/classifiers.py
"""
Classifiers and AUC used by the experiments.

logistic: L2-penalised logistic regression, one-vs-rest, full-batch gradient
          descent on standardised features (fixed learning rate, iteration cap).
rsm:      relational similarity; a class scores the mean RBF similarity
          exp(-||x - x_t||^2 / sigma^2) to its training vectors, sigma picked
          from a grid by k-fold cross-validation on the training set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import structlog
from scipy.special import expit, logsumexp, softmax
from scipy.stats import rankdata

log = structlog.get_logger()

LEARNING_RATE = 0.5
ITERATIONS = 2000
L2_PENALTY = 1e-3
SIGMA_GRID = (0.001, 0.01, 0.1, 1.0)
CV_FOLDS = 5


class ClassifierError(ValueError):
    """Training data a classifier cannot be fitted on (e.g. a single class)."""


def _check_training(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ClassifierError("features must be (examples x dims) with one label per example")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ClassifierError(f"training labels hold {len(classes)} class(es); at least 2 are required")
    return X, y, classes


@dataclass
class LogisticModel:
    classes: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    weights: np.ndarray  # (dims, models)
    bias: np.ndarray  # (models,)

    def decision(self, X: np.ndarray) -> np.ndarray:
        Z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Z @ self.weights + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        """(examples x classes) scores; binary models give [1 - p, p]."""
        p = expit(self.decision(X))
        if len(self.classes) == 2:
            return np.column_stack([1.0 - p[:, 0], p[:, 0]])
        return p


def _fit_logistic(X: np.ndarray, y: np.ndarray, lr: float, iterations: int, l2: float) -> LogisticModel:
    X, y, classes = _check_training(X, y)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    targets = classes[1:] if len(classes) == 2 else classes
    Y = np.column_stack([(y == c).astype(np.float64) for c in targets])
    n, d = Z.shape
    W = np.zeros((d, Y.shape[1]))
    b = np.zeros(Y.shape[1])
    for _ in range(iterations):
        R = expit(Z @ W + b) - Y
        W -= lr * (Z.T @ R / n + l2 * W)
        b -= lr * R.mean(axis=0)
    return LogisticModel(classes, mean, scale, W, b)


@dataclass
class RSMModel:
    classes: np.ndarray
    train: np.ndarray
    labels: np.ndarray
    sigma: float
    cv_accuracy: dict[float, float] = field(default_factory=dict)

    def log_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        d2 = (
            np.sum(X ** 2, axis=1)[:, None]
            + np.sum(self.train ** 2, axis=1)[None, :]
            - 2.0 * X @ self.train.T
        )
        logk = -np.maximum(d2, 0.0) / self.sigma ** 2
        out = np.empty((X.shape[0], len(self.classes)))
        for c, cls in enumerate(self.classes):
            cols = self.labels == cls
            out[:, c] = logsumexp(logk[:, cols], axis=1) - np.log(cols.sum())
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.log_scores(X), axis=1)


def _cv_accuracy(X: np.ndarray, y: np.ndarray, sigma: float, folds: list[np.ndarray]) -> float:
    hits = 0
    total = 0
    for fold in folds:
        train = np.ones(len(y), dtype=bool)
        train[fold] = False
        if len(np.unique(y[train])) < 2:
            continue
        model = RSMModel(np.unique(y[train]), X[train], y[train], sigma)
        pred = model.classes[np.argmax(model.log_scores(X[fold]), axis=1)]
        hits += int(np.sum(pred == y[fold]))
        total += len(fold)
    return hits / total if total else 0.0


def _fit_rsm(X: np.ndarray, y: np.ndarray, sigmas: Sequence[float], folds: int, seed: int) -> RSMModel:
    X, y, classes = _check_training(X, y)
    order = np.random.default_rng(seed).permutation(len(y))
    parts = [p for p in np.array_split(order, min(folds, len(y))) if len(p)]
    scores = {float(s): _cv_accuracy(X, y, float(s), parts) for s in sigmas}
    sigma = max(scores, key=lambda s: (scores[s], -s))
    log.debug("rsm_sigma_selected", sigma=sigma, cv_accuracy=scores)
    return RSMModel(classes, X, y, sigma, scores)


def train_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    kind: str = "logistic",
    learning_rate: float = LEARNING_RATE,
    iterations: int = ITERATIONS,
    l2: float = L2_PENALTY,
    sigmas: Sequence[float] = SIGMA_GRID,
    folds: int = CV_FOLDS,
    seed: int = 0,
):
    if kind == "logistic":
        return _fit_logistic(features, labels, learning_rate, iterations, l2)
    if kind == "rsm":
        return _fit_rsm(features, labels, sigmas, folds, seed)
    raise ClassifierError(f"unknown classifier: {kind!r}")


def predict(model, features: np.ndarray) -> np.ndarray:
    """(examples x classes) scores, columns ordered as ``model.classes``."""
    return model.predict(features)


def predict_labels(model, features: np.ndarray) -> np.ndarray:
    return model.classes[np.argmax(model.predict(features), axis=1)]


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Binary AUC from midranks; the larger label value is the positive class."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if len(scores) != len(labels):
        raise ValueError(f"length mismatch: {len(scores)} != {len(labels)}")
    classes = np.unique(labels)
    if len(classes) != 2:
        raise ValueError(f"AUC needs exactly two classes, got {len(classes)}")
    pos = labels == classes[1]
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def total_auc(scores: np.ndarray, labels: np.ndarray, classes: Optional[np.ndarray] = None) -> float:
    """Uniform average of one-vs-rest AUCs over the classes present in ``labels``."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim == 1:
        return auc(scores, labels)
    classes = np.unique(labels) if classes is None else np.asarray(classes)
    if len(classes) == 2 and scores.shape[1] == 2:
        return auc(scores[:, 1], (labels == classes[1]).astype(np.int64))
    values = []
    for c, cls in enumerate(classes):
        target = labels == cls
        if target.all() or not target.any():
            continue
        values.append(auc(scores[:, c], target.astype(np.int64)))
    if not values:
        raise ValueError("Total-AUC needs at least two classes among the labels")
    return float(np.mean(values))
