# grafl/features/operators.py
"""
Relational feature operators.

``apply_operator`` evaluates one element over an explicit neighbour set;
``apply_matrix`` evaluates every element at once from a binary neighbourhood
matrix. Both follow the same formulas and agree on every element.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from grafl.schemas.config import ALL_OPERATORS, ConfigError, OperatorSpec

_MAX = np.finfo(np.float64).max


@dataclass(frozen=True)
class RelationalOperator:
    tag: str
    p: float = 1.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.tag not in ALL_OPERATORS:
            raise ConfigError(f"operator.tag: unknown operator {self.tag!r}")
        if not self.p >= 1.0:
            raise ConfigError("operator.p: weighted-lp exponent must be >= 1")
        if not self.sigma > 0.0:
            raise ConfigError("operator.sigma: rbf bandwidth must be > 0")

    @classmethod
    def from_spec(cls, spec: OperatorSpec) -> "RelationalOperator":
        return cls(tag=spec.tag, p=float(spec.p), sigma=float(spec.sigma))

    @property
    def needs_self(self) -> bool:
        return self.tag in ("weighted-lp", "rbf")

    def to_dict(self) -> dict:
        out: dict = {"tag": self.tag}
        if self.tag == "weighted-lp":
            out["p"] = self.p
        if self.tag == "rbf":
            out["sigma"] = self.sigma
        return out


def apply_operator(
    op: RelationalOperator, S: np.ndarray, x: np.ndarray, self_value: Optional[float] = None
) -> float:
    """phi<S, x> for a single element; ``self_value`` is x_i for weighted-lp and rbf."""
    vals = np.asarray(x, dtype=np.float64)[np.asarray(S, dtype=np.int64)]
    if op.needs_self and self_value is None:
        raise ValueError(f"{op.tag} needs the element's own value")
    if op.tag == "rbf":
        return float(np.exp(-np.sum((self_value - vals) ** 2) / op.sigma ** 2))
    if len(vals) == 0:
        return 0.0
    if op.tag == "sum":
        return float(vals.sum())
    if op.tag == "mean":
        return float(vals.mean())
    if op.tag == "max":
        return float(vals.max())
    if op.tag == "hadamard":
        if (vals == 0).any():
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.clip(np.prod(vals), -_MAX, _MAX))
    return float(np.sum(np.abs(self_value - vals) ** op.p))


def _segments(M: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    counts = np.diff(M.indptr)
    rows = np.flatnonzero(counts)
    return rows, M.indptr[rows]


def apply_matrix(
    op: RelationalOperator,
    M: sparse.csr_matrix,
    x: np.ndarray,
    self_values: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    phi<S_i, x> for every row i of the binary neighbourhood matrix ``M``.

    Empty rows give 0, except rbf which gives 1 (empty sum in the exponent).
    Products saturate at the largest finite double.
    """
    x = np.asarray(x, dtype=np.float64)
    rows_total = M.shape[0]
    out = np.zeros(rows_total, dtype=np.float64)
    gathered = x[M.indices]

    if op.tag == "sum":
        return np.asarray(M @ x, dtype=np.float64).ravel()
    if op.tag == "mean":
        counts = np.diff(M.indptr)
        sums = np.asarray(M @ x, dtype=np.float64).ravel()
        np.divide(sums, counts, out=out, where=counts > 0)
        return out
    if op.tag in ("max", "hadamard"):
        rows, starts = _segments(M)
        if len(rows):
            if op.tag == "max":
                out[rows] = np.maximum.reduceat(gathered, starts)
            else:
                with np.errstate(over="ignore", invalid="ignore"):
                    prod = np.multiply.reduceat(gathered, starts)
                out[rows] = np.nan_to_num(prod, nan=0.0, posinf=_MAX, neginf=-_MAX)
        return out

    if self_values is None:
        self_values = x
    own = np.asarray(self_values, dtype=np.float64)
    row_of = np.repeat(np.arange(rows_total), np.diff(M.indptr))
    diff = own[row_of] - gathered
    if op.tag == "weighted-lp":
        return np.bincount(row_of, weights=np.abs(diff) ** op.p, minlength=rows_total)
    # rbf
    sq = np.bincount(row_of, weights=diff ** 2, minlength=rows_total)
    return np.exp(-sq / op.sigma ** 2)
