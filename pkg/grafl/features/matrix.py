# grafl/features/matrix.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from grafl.features.functions import RelationalFunction

SPARSE_BYTES_PER_VALUE = 2
DENSE_BYTES_PER_VALUE = 8


@dataclass(frozen=True)
class MatrixStats:
    rows: int
    cols: int
    nonzeros: int
    density: float
    sparse_bytes: int
    dense_bytes: int

    def as_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "nonzeros": self.nonzeros,
            "density": self.density,
            "sparse_bytes": self.sparse_bytes,
            "dense_bytes": self.dense_bytes,
        }


def matrix_stats(values: np.ndarray) -> MatrixStats:
    """Nonzero count, density and storage at 2 bytes per nonzero vs 8 bytes per dense cell."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    rows, cols = values.shape
    nnz = int(np.count_nonzero(values))
    cells = rows * cols
    return MatrixStats(
        rows=int(rows),
        cols=int(cols),
        nonzeros=nnz,
        density=nnz / cells if cells else 0.0,
        sparse_bytes=SPARSE_BYTES_PER_VALUE * nnz,
        dense_bytes=DENSE_BYTES_PER_VALUE * cells,
    )


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature columns over all elements of one kind, aligned with their definitions."""

    kind: str
    values: np.ndarray
    functions: tuple[RelationalFunction, ...] = ()
    layers: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("feature values must be a 2-d array")
        if values.shape[1] != len(self.functions):
            raise ValueError("one function per column is required")
        if self.layers and len(self.layers) != len(self.functions):
            raise ValueError("one layer index per column is required")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "layers", tuple(self.layers) or tuple(f.depth for f in self.functions))

    @classmethod
    def from_columns(
        cls, kind: str, rows: int, functions: list[RelationalFunction], columns: list[np.ndarray], layers: list[int]
    ) -> "FeatureMatrix":
        values = np.column_stack(columns) if columns else np.zeros((rows, 0))
        return cls(kind=kind, values=values, functions=tuple(functions), layers=tuple(layers))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def names(self) -> list[str]:
        return [f.name() for f in self.functions]

    def stats(self) -> MatrixStats:
        return matrix_stats(self.values)
