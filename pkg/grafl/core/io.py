# grafl/core/io.py
"""Text formats: edge lists, attribute and label files, feature matrices."""
from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, Optional

import numpy as np
import structlog

from grafl.core.graph import Graph

log = structlog.get_logger()


class GraphFormatError(ValueError):
    """Malformed graph, attribute or label file (message carries the line number)."""


def _data_lines(path: str | Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def load_edge_list(path: str | Path, directed: bool = True, weighted: bool = False) -> Graph:
    """
    Read ``src dst [weight]`` lines.

    Node tokens are re-indexed densely in first-appearance order. Self-loops are
    kept and duplicate pairs collapse to one edge with summed weight.
    """
    index: dict[str, int] = {}
    src: list[int] = []
    dst: list[int] = []
    weights: list[float] = []

    for lineno, parts in _data_lines(path):
        if len(parts) < 2 or len(parts) > 3:
            raise GraphFormatError(f"{path}:{lineno}: expected 'src dst [weight]', got {len(parts)} fields")
        if weighted:
            if len(parts) != 3:
                raise GraphFormatError(f"{path}:{lineno}: weight column missing")
            try:
                weights.append(float(parts[2]))
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
        for token, bucket in ((parts[0], src), (parts[1], dst)):
            if token not in index:
                index[token] = len(index)
            bucket.append(index[token])

    g = Graph.from_edges(
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        n=len(index),
        directed=directed,
        weights=np.asarray(weights, dtype=np.float64) if weighted else None,
        node_names=list(index),
    )
    log.info("graph_loaded", path=str(path), n=g.n, m=g.m, directed=directed, weighted=weighted)
    return g


def _element_id(g: Graph, kind: str, tokens: list[str], where: str) -> int:
    try:
        if kind == "node":
            return g.node_index(tokens[0])
        return g.edge_index(g.node_index(tokens[0]), g.node_index(tokens[1]))
    except KeyError:
        raise GraphFormatError(f"{where}: unknown {kind} {' '.join(tokens)!r}") from None


def load_attributes(path: str | Path, g: Graph, kind: str = "node") -> Graph:
    """
    Attach real-valued attribute columns from a header + rows file.

    The header names the value columns (a leading id column name is tolerated).
    Elements missing from the file get 0.
    """
    key_width = 1 if kind == "node" else 2
    size = g.size(kind)
    header: Optional[list[str]] = None
    columns: dict[str, np.ndarray] = {}

    for lineno, parts in _data_lines(path):
        where = f"{path}:{lineno}"
        if header is None:
            header = parts
            continue
        values = parts[key_width:]
        if len(header) == len(values) + key_width:
            header = header[key_width:]
        if not columns:
            if len(values) != len(header):
                raise GraphFormatError(f"{where}: {len(values)} values for {len(header)} columns")
            columns = {name: np.zeros(size, dtype=np.float64) for name in header}
        if len(values) != len(header):
            raise GraphFormatError(f"{where}: {len(values)} values for {len(header)} columns")
        idx = _element_id(g, kind, parts[:key_width], where)
        for name, token in zip(header, values):
            try:
                columns[name][idx] = float(token)
            except ValueError:
                raise GraphFormatError(f"{where}: bad value {token!r} for {name!r}") from None

    if header is None:
        return g
    if not columns:
        columns = {name: np.zeros(size, dtype=np.float64) for name in header}
    log.info("attributes_loaded", path=str(path), kind=kind, columns=list(columns))
    if kind == "node":
        return g.with_attrs(node_attrs=columns)
    return g.with_attrs(edge_attrs=columns)


def load_labels(path: str | Path, g: Graph, kind: str = "node") -> np.ndarray:
    """
    Read ``element_id label`` lines (``src dst label`` for edges).

    Integer labels are used as-is; other tokens are numbered in sorted order.
    Unlabelled elements get -1.
    """
    key_width = 1 if kind == "node" else 2
    ids: list[int] = []
    tokens: list[str] = []
    for lineno, parts in _data_lines(path):
        where = f"{path}:{lineno}"
        if len(parts) != key_width + 1:
            raise GraphFormatError(f"{where}: expected {key_width + 1} fields")
        ids.append(_element_id(g, kind, parts[:key_width], where))
        tokens.append(parts[key_width])

    labels = np.full(g.size(kind), -1, dtype=np.int64)
    if not tokens:
        return labels
    try:
        values = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError:
        classes = sorted(set(tokens))
        lookup = {t: i for i, t in enumerate(classes)}
        values = np.array([lookup[t] for t in tokens], dtype=np.int64)
    if (values < 0).any():
        raise GraphFormatError(f"{path}: labels must be non-negative")
    labels[np.asarray(ids, dtype=np.int64)] = values
    return labels


@contextmanager
def atomic_write(path: str | Path) -> Iterator[IO[str]]:
    """Write to a temp file next to ``path`` and rename it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_value(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def write_matrix_csv(path: str | Path, values: np.ndarray, names: Optional[list[str]] = None) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    names = names or [f"f{j}" for j in range(values.shape[1])]
    with atomic_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["element_id", *names])
        for i in range(values.shape[0]):
            writer.writerow([i, *(format_value(v) for v in values[i])])


def write_matrix_triplets(path: str | Path, values: np.ndarray) -> None:
    """Sparse ``element feature value`` lines for the nonzero entries."""
    rows, cols = np.nonzero(np.asarray(values))
    with atomic_write(path) as fh:
        for i, j in zip(rows, cols):
            fh.write(f"{i} {j} {format_value(values[i, j])}\n")


def read_matrix_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Inverse of :func:`write_matrix_csv`; returns (values, column names)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise GraphFormatError(f"{path}: empty matrix file") from None
        if not header or header[0] != "element_id":
            raise GraphFormatError(f"{path}:1: header must start with element_id")
        names = header[1:]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise GraphFormatError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-numeric value") from None
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    return values, names
