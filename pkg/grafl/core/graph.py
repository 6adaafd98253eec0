# grafl/core/graph.py
"""
Immutable graph in dual CSR form plus neighbourhood queries.

Undirected inputs are stored as two arcs per edge sharing one edge id, so
``out_adj`` and ``in_adj`` describe the same arc set and every degree
feature satisfies d+ = d- = d. Self-loops keep a single arc.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Hashable, Mapping, Optional, Sequence

import networkx as nx
import numpy as np
from scipy import sparse

KINDS = ("node", "edge")
DIRECTIONS = ("out", "in", "all")


@dataclass(frozen=True)
class CSRAdjacency:
    offsets: np.ndarray
    neighbors: np.ndarray
    edge_ids: np.ndarray

    def degree(self) -> np.ndarray:
        return np.diff(self.offsets)

    def row(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.offsets[v], self.offsets[v + 1]
        return self.neighbors[lo:hi], self.edge_ids[lo:hi]


@dataclass(frozen=True)
class GraphElement:
    kind: str
    index: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind: {self.kind!r}")


@dataclass(frozen=True)
class NeighborhoodSelector:
    direction: str = "all"
    hops: int = 1

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction: {self.direction!r}")
        if int(self.hops) < 1:
            raise ValueError("hops must be >= 1")


def _csr(rows: np.ndarray, cols: np.ndarray, shape: tuple[int, int]) -> sparse.csr_matrix:
    """Binary CSR matrix with sorted indices and no duplicate entries."""
    data = np.ones(len(rows), dtype=np.float64)
    mat = sparse.csr_matrix((data, (rows, cols)), shape=shape)
    mat.sum_duplicates()
    mat.data[:] = 1.0
    mat.sort_indices()
    return mat


def _binarize(mat: sparse.spmatrix, drop_diagonal: bool = True) -> sparse.csr_matrix:
    coo = sparse.coo_matrix(mat)
    keep = coo.data != 0
    if drop_diagonal:
        keep &= coo.row != coo.col
    return _csr(coo.row[keep], coo.col[keep], coo.shape)


def _build_adjacency(n: int, heads: np.ndarray, tails: np.ndarray, eids: np.ndarray) -> CSRAdjacency:
    order = np.lexsort((eids, tails, heads))
    counts = np.bincount(heads, minlength=n) if n else np.zeros(0, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CSRAdjacency(
        offsets=offsets,
        neighbors=tails[order].astype(np.int64),
        edge_ids=eids[order].astype(np.int64),
    )


def collapse_edges(
    src: np.ndarray,
    dst: np.ndarray,
    n: int,
    directed: bool,
    weights: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, Optional[np.ndarray], np.ndarray]:
    """
    Merge duplicate (src, dst) pairs keeping first-appearance order.

    Returns (src, dst, weights, first_index); weights of merged pairs are summed.
    Undirected pairs are canonicalised to (min, max) first.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if not directed:
        src, dst = np.minimum(src, dst), np.maximum(src, dst)
    if len(src) == 0:
        w = None if weights is None else np.zeros(0, dtype=np.float64)
        return src, dst, w, np.zeros(0, dtype=np.int64)

    keys = src * max(n, 1) + dst
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    first_idx = first[order]

    merged_w = None
    if weights is not None:
        merged_w = np.bincount(rank[inverse], weights=np.asarray(weights, dtype=np.float64),
                               minlength=len(order))
    return src[first_idx], dst[first_idx], merged_w, first_idx


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    directed: bool
    src: np.ndarray
    dst: np.ndarray
    weights: Optional[np.ndarray] = None
    node_attrs: Mapping[str, np.ndarray] = field(default_factory=dict)
    edge_attrs: Mapping[str, np.ndarray] = field(default_factory=dict)
    node_names: tuple[str, ...] = ()
    out_adj: CSRAdjacency = field(init=False, repr=False)
    in_adj: CSRAdjacency = field(init=False, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n):
            raise ValueError("edge endpoint outside [0, n)")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != src.shape:
                raise ValueError("weights must have one value per edge")
            object.__setattr__(self, "weights", w)
        for name, col in self.node_attrs.items():
            if len(col) != self.n:
                raise ValueError(f"node attribute {name!r} has wrong length")
        for name, col in self.edge_attrs.items():
            if len(col) != len(src):
                raise ValueError(f"edge attribute {name!r} has wrong length")
        if not self.node_names:
            object.__setattr__(self, "node_names", tuple(str(i) for i in range(self.n)))

        a_src, a_dst, a_eid = self.arcs
        object.__setattr__(self, "out_adj", _build_adjacency(self.n, a_src, a_dst, a_eid))
        object.__setattr__(self, "in_adj", _build_adjacency(self.n, a_dst, a_src, a_eid))

    # ---------- Construction ----------
    @classmethod
    def from_edges(
        cls,
        src: Sequence[int] | np.ndarray,
        dst: Sequence[int] | np.ndarray,
        n: Optional[int] = None,
        directed: bool = True,
        weights: Optional[Sequence[float] | np.ndarray] = None,
        node_attrs: Optional[Mapping[str, np.ndarray]] = None,
        edge_attrs: Optional[Mapping[str, np.ndarray]] = None,
        node_names: Sequence[str] = (),
    ) -> "Graph":
        """Build a graph from endpoint arrays; duplicate pairs collapse (weights summed)."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if n is None:
            n = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        s, d, w, first = collapse_edges(src, dst, n, directed, weights)
        e_attrs = {k: np.asarray(v, dtype=np.float64)[first] for k, v in (edge_attrs or {}).items()}
        n_attrs = {k: np.asarray(v, dtype=np.float64) for k, v in (node_attrs or {}).items()}
        return cls(
            n=int(n),
            directed=directed,
            src=s,
            dst=d,
            weights=w,
            node_attrs=n_attrs,
            edge_attrs=e_attrs,
            node_names=tuple(node_names),
        )

    @classmethod
    def from_networkx(cls, G: nx.Graph, weight: Optional[str] = None) -> "Graph":
        nodes = list(G.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        edges = list(G.edges(data=True))
        src = np.fromiter((index[u] for u, _, _ in edges), dtype=np.int64, count=len(edges))
        dst = np.fromiter((index[v] for _, v, _ in edges), dtype=np.int64, count=len(edges))
        weights = None
        if weight is not None:
            weights = np.array([float(d.get(weight, 1.0)) for _, _, d in edges], dtype=np.float64)
        return cls.from_edges(
            src, dst, n=len(nodes), directed=G.is_directed(), weights=weights,
            node_names=[str(v) for v in nodes],
        )

    def with_attrs(
        self,
        node_attrs: Optional[Mapping[str, np.ndarray]] = None,
        edge_attrs: Optional[Mapping[str, np.ndarray]] = None,
    ) -> "Graph":
        merged_nodes = {**self.node_attrs, **(node_attrs or {})}
        merged_edges = {**self.edge_attrs, **(edge_attrs or {})}
        return replace(self, node_attrs=merged_nodes, edge_attrs=merged_edges, _cache={})

    def drop_edges(self, edge_ids: np.ndarray) -> "Graph":
        """Same node set, without the given edge ids (remaining edges renumbered in order)."""
        keep = np.ones(self.m, dtype=bool)
        keep[np.asarray(edge_ids, dtype=np.int64)] = False
        return replace(
            self,
            src=self.src[keep],
            dst=self.dst[keep],
            weights=None if self.weights is None else self.weights[keep],
            edge_attrs={k: v[keep] for k, v in self.edge_attrs.items()},
            _cache={},
        )

    # ---------- Basic views ----------
    @property
    def m(self) -> int:
        return int(len(self.src))

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def size(self, kind: str) -> int:
        if kind == "node":
            return self.n
        if kind == "edge":
            return self.m
        raise ValueError(f"unknown element kind: {kind!r}")

    def cached(self, key: Hashable, builder: Callable[[], Any]) -> Any:
        """Memoise derived structures; the graph itself never changes."""
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(arc_src, arc_dst, arc_edge_id); undirected edges yield two arcs."""
        def build():
            eids = np.arange(self.m, dtype=np.int64)
            if self.directed:
                return self.src, self.dst, eids
            keep = self.src != self.dst
            return (
                np.concatenate([self.src, self.dst[keep]]),
                np.concatenate([self.dst, self.src[keep]]),
                np.concatenate([eids, eids[keep]]),
            )
        return self.cached("arcs", build)

    @property
    def arc_weights(self) -> np.ndarray:
        _, _, eids = self.arcs
        if self.weights is None:
            return np.ones(len(eids), dtype=np.float64)
        return self.weights[eids]

    def out_degree(self, weighted: bool = False) -> np.ndarray:
        if not weighted:
            return self.out_adj.degree().astype(np.float64)
        a_src, _, _ = self.arcs
        return np.bincount(a_src, weights=self.arc_weights, minlength=self.n).astype(np.float64)

    def in_degree(self, weighted: bool = False) -> np.ndarray:
        if not weighted:
            return self.in_adj.degree().astype(np.float64)
        _, a_dst, _ = self.arcs
        return np.bincount(a_dst, weights=self.arc_weights, minlength=self.n).astype(np.float64)

    def total_degree(self, weighted: bool = False) -> np.ndarray:
        if not self.directed:
            return self.out_degree(weighted)
        return self.out_degree(weighted) + self.in_degree(weighted)

    def node_index(self, token: str) -> int:
        lookup = self.cached("node_lookup", lambda: {name: i for i, name in enumerate(self.node_names)})
        return lookup[token]

    def edge_index(self, s: int, d: int) -> int:
        def build():
            return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.src, self.dst))}
        lookup = self.cached("edge_lookup", build)
        if not self.directed:
            s, d = min(s, d), max(s, d)
        return lookup[(int(s), int(d))]

    def has_edge(self, s: int, d: int) -> bool:
        try:
            self.edge_index(s, d)
        except KeyError:
            return False
        return True

    # ---------- Sparse views ----------
    def adjacency(self, direction: str = "out", weighted: bool = False) -> sparse.csr_matrix:
        """n x n adjacency; self-loops kept, weights summed when requested."""
        def build():
            a_src, a_dst, _ = self.arcs
            data = self.arc_weights if weighted else np.ones(len(a_src))
            out = sparse.csr_matrix((data, (a_src, a_dst)), shape=(self.n, self.n))
            out.sum_duplicates()
            if direction == "out":
                return out
            if direction == "in":
                return out.T.tocsr()
            both = out + out.T
            if not self.directed:
                both = out.copy()
            return both.tocsr()
        return self.cached(("adjacency", direction, weighted), build)

    def skeleton(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Undirected simple skeleton: (sk_src, sk_dst, edge_to_skeleton).

        sk_src < sk_dst; every graph edge maps to its skeleton edge, self-loops map to -1.
        """
        def build():
            lo = np.minimum(self.src, self.dst)
            hi = np.maximum(self.src, self.dst)
            loops = lo == hi
            mapping = np.full(self.m, -1, dtype=np.int64)
            if (~loops).any():
                keys = lo[~loops] * max(self.n, 1) + hi[~loops]
                uniq, inverse = np.unique(keys, return_inverse=True)
                mapping[~loops] = inverse
                return uniq // max(self.n, 1), uniq % max(self.n, 1), mapping
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), mapping
        return self.cached("skeleton", build)

    def step_matrix(self, kind: str, direction: str) -> sparse.csr_matrix:
        """Binary one-hop neighbourhood relation (row i = neighbours of element i)."""
        if direction not in DIRECTIONS:
            raise ValueError(f"unknown direction: {direction!r}")
        return self.cached(("step", kind, direction), lambda: self._build_step(kind, direction))

    def _build_step(self, kind: str, direction: str) -> sparse.csr_matrix:
        a_src, a_dst, a_eid = self.arcs
        if kind == "node":
            out = _csr(a_src, a_dst, (self.n, self.n))
            if direction == "out":
                return _binarize(out)
            if direction == "in":
                return _binarize(out.T)
            return _binarize(out + out.T)
        if kind != "edge":
            raise ValueError(f"unknown element kind: {kind!r}")

        m = self.m
        e = np.arange(m, dtype=np.int64)
        endpoints = _csr(np.concatenate([e, e]), np.concatenate([self.src, self.dst]), (m, self.n))
        sources = _csr(a_src, a_eid, (self.n, m))
        targets = _csr(a_dst, a_eid, (self.n, m))
        if direction == "out":
            rel = endpoints @ sources
        elif direction == "in":
            rel = endpoints @ targets
        else:
            rel = endpoints @ sources + endpoints @ targets
        rel = _binarize(rel)
        loops = self.src == self.dst
        if loops.any():
            rel = rel @ sparse.diags((~loops).astype(np.float64))
            rel = _binarize(rel)
        return rel


def _check_element(g: Graph, e: GraphElement) -> None:
    size = g.size(e.kind)
    if not 0 <= int(e.index) < size:
        raise IndexError(f"{e.kind} {e.index} outside [0, {size})")


def neighbors(g: Graph, e: GraphElement, sel: NeighborhoodSelector) -> np.ndarray:
    """Ascending ids of the elements within ``sel.hops`` steps of ``e`` (``e`` excluded)."""
    _check_element(g, e)
    step = g.step_matrix(e.kind, sel.direction)
    start = int(e.index)
    seen = {start}
    frontier = [start]
    for _ in range(sel.hops):
        nxt = []
        for v in frontier:
            for w in step.indices[step.indptr[v]:step.indptr[v + 1]]:
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    seen.discard(start)
    return np.array(sorted(seen), dtype=np.int64)


def neighborhood_matrix(g: Graph, kind: str, sel: NeighborhoodSelector) -> sparse.csr_matrix:
    """Binary matrix whose row i is ``neighbors(g, (kind, i), sel)``."""
    def build():
        step = g.step_matrix(kind, sel.direction)
        reach = step
        for _ in range(sel.hops - 1):
            reach = _binarize(reach + reach @ step)
        return reach
    return g.cached(("neighborhood", kind, sel.direction, sel.hops), build)
