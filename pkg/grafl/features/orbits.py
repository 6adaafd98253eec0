# grafl/features/orbits.py
"""
Exact 2-4 node graphlet orbit counts for nodes (15 orbits) and edges (12).

Counting runs on the simple undirected skeleton. Per element, a handful of
raw path/triangle tallies are collected by local enumeration and the orbit
counts follow from a fixed triangular system, with K4 counts computed
directly. Node orbits:

    0 edge, 1 path end, 2 path middle, 3 triangle,
    4 P4 end, 5 P4 inner, 6 star leaf, 7 star centre, 8 4-cycle,
    9 paw pendant, 10 paw triangle (degree 2), 11 paw hub,
    12 diamond (degree 2), 13 diamond (degree 3), 14 K4.

Edge orbits:

    0 path, 1 triangle, 2 P4 outer edge, 3 P4 middle edge, 4 star,
    5 4-cycle, 6 paw pendant edge, 7 paw edge opposite the hub,
    8 paw triangle edge at the hub, 9 diamond rim, 10 diamond chord, 11 K4.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
import structlog

from grafl.core.graph import Graph
from grafl.core.parallel import parallel_map, resolve_workers

log = structlog.get_logger()

NODE_ORBITS = 15
EDGE_ORBITS = 12


class _Skeleton:
    """Lazy neighbour lists, sets and edge-id maps over CSR arrays."""

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, eid_at: np.ndarray):
        self._indptr = indptr
        self._indices = indices
        self._eid_at = eid_at
        self._lists: dict[int, list[int]] = {}
        self._sets: dict[int, set[int]] = {}
        self._eids: dict[int, dict[int, int]] = {}
        self.deg = np.diff(indptr).tolist()

    def nbrs(self, v: int) -> list[int]:
        out = self._lists.get(v)
        if out is None:
            out = self._indices[self._indptr[v]:self._indptr[v + 1]].tolist()
            self._lists[v] = out
        return out

    def nset(self, v: int) -> set[int]:
        out = self._sets.get(v)
        if out is None:
            out = set(self.nbrs(v))
            self._sets[v] = out
        return out

    def eids(self, v: int) -> dict[int, int]:
        out = self._eids.get(v)
        if out is None:
            lo, hi = self._indptr[v], self._indptr[v + 1]
            out = dict(zip(self.nbrs(v), self._eid_at[lo:hi].tolist()))
            self._eids[v] = out
        return out


def _skeleton_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    def build():
        sk_src, sk_dst, _ = g.skeleton()
        k = len(sk_src)
        rows = np.concatenate([sk_src, sk_dst])
        cols = np.concatenate([sk_dst, sk_src])
        eids = np.concatenate([np.arange(k), np.arange(k)])
        order = np.lexsort((cols, rows))
        indptr = np.zeros(g.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=g.n), out=indptr[1:])
        return indptr, cols[order].astype(np.int64), eids[order].astype(np.int64), sk_src, sk_dst
    return g.cached("orbit_skeleton", build)


def _ranges(size: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, size, max(1, min(workers, size)) + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _triangles_and_cliques(
    span: tuple[int, int], indptr: np.ndarray, indices: np.ndarray, eid_at: np.ndarray,
    sk_src: np.ndarray, sk_dst: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per skeleton edge: triangles through it and K4s containing it."""
    lo, hi = span
    sk = _Skeleton(indptr, indices, eid_at)
    tri = np.zeros(hi - lo, dtype=np.int64)
    k4 = np.zeros(hi - lo, dtype=np.int64)
    for e in range(lo, hi):
        common = sk.nset(int(sk_src[e])) & sk.nset(int(sk_dst[e]))
        tri[e - lo] = len(common)
        k4[e - lo] = sum(len(sk.nset(z) & common) for z in common) // 2
    return tri, k4


def _node_rows(
    span: tuple[int, int], indptr: np.ndarray, indices: np.ndarray, eid_at: np.ndarray,
    tri: np.ndarray, k4_node: np.ndarray,
) -> np.ndarray:
    lo, hi = span
    sk = _Skeleton(indptr, indices, eid_at)
    deg = sk.deg
    tri = tri.tolist()
    out = np.zeros((hi - lo, NODE_ORBITS), dtype=np.int64)

    for x in range(lo, hi):
        o = [0] * NODE_ORBITS
        f_12_14 = f_10_13 = f_13_14 = f_11_13 = 0
        f_7_11 = f_5_8 = f_6_9 = f_9_12 = f_4_8 = f_8_12 = 0
        f_14 = int(k4_node[x])
        nx_ = sk.nbrs(x)
        sx = sk.nset(x)
        ex = sk.eids(x)
        common: dict[int, int] = {}
        o[0] = deg[x]

        # x as the middle node
        for y in nx_:
            ey_map = sk.eids(y)
            for z in sk.nbrs(y):
                if z == x:
                    continue
                if z in sx:
                    if z < y:
                        t = tri[ey_map[z]]
                        f_12_14 += t - 1
                        f_10_13 += (deg[y] - 1 - t) + (deg[z] - 1 - t)
                else:
                    common[z] = common.get(z, 0) + 1

        for i, y in enumerate(nx_):
            ty = tri[ex[y]]
            sy = sk.nset(y)
            for z in nx_[i + 1:]:
                tz = tri[ex[z]]
                if z in sy:
                    o[3] += 1
                    f_13_14 += (ty - 1) + (tz - 1)
                    f_11_13 += (deg[x] - 1 - ty) + (deg[x] - 1 - tz)
                else:
                    o[2] += 1
                    f_7_11 += (deg[x] - 1 - ty - 1) + (deg[x] - 1 - tz - 1)
                    f_5_8 += (deg[y] - 1 - ty) + (deg[z] - 1 - tz)

        # x as a side node
        for y in nx_:
            ty = tri[ex[y]]
            ey_map = sk.eids(y)
            for z in sk.nbrs(y):
                if z == x or z in sx:
                    continue
                tz = tri[ey_map[z]]
                o[1] += 1
                f_6_9 += deg[y] - 1 - ty - 1
                f_9_12 += tz
                f_4_8 += deg[z] - 1 - tz
                f_8_12 += common[z] - 1

        o[14] = f_14
        o[13] = (f_13_14 - 6 * f_14) // 2
        o[12] = f_12_14 - 3 * f_14
        o[11] = (f_11_13 - f_13_14 + 6 * f_14) // 2
        o[10] = f_10_13 - f_13_14 + 6 * f_14
        o[9] = (f_9_12 - 2 * f_12_14 + 6 * f_14) // 2
        o[8] = (f_8_12 - 2 * f_12_14 + 6 * f_14) // 2
        o[7] = (f_13_14 + f_7_11 - f_11_13 - 6 * f_14) // 6
        o[6] = (2 * f_12_14 + f_6_9 - f_9_12 - 6 * f_14) // 2
        o[5] = 2 * f_12_14 + f_5_8 - f_8_12 - 6 * f_14
        o[4] = 2 * f_12_14 + f_4_8 - f_8_12 - 6 * f_14
        out[x - lo] = o
    return out


def _edge_rows(
    span: tuple[int, int], indptr: np.ndarray, indices: np.ndarray, eid_at: np.ndarray,
    sk_src: np.ndarray, sk_dst: np.ndarray, tri: np.ndarray, k4: np.ndarray,
) -> np.ndarray:
    lo, hi = span
    sk = _Skeleton(indptr, indices, eid_at)
    deg = sk.deg
    tri = tri.tolist()
    out = np.zeros((hi - lo, EDGE_ORBITS), dtype=np.int64)

    for e in range(lo, hi):
        r = [0] * EDGE_ORBITS
        a, b = int(sk_src[e]), int(sk_dst[e])
        for x, y in ((a, b), (b, a)):
            sx, sy = sk.nset(x), sk.nset(y)
            ex, ey = sk.eids(x), sk.eids(y)
            for z in sk.nbrs(x):
                if z == y or z not in sy:
                    continue
                if x < y:
                    r[1] += 1
                    r[10] += tri[e] - 1
                    r[7] += deg[z] - 2
                r[9] += tri[ex[z]] - 1
                r[8] += deg[x] - 2
            for z in sk.nbrs(y):
                if z == x or z in sx:
                    continue
                r[0] += 1
                r[6] += tri[ey[z]]
                r[5] += len(sx & sk.nset(z)) - 1
                r[4] += deg[y] - 2
                r[3] += deg[x] - 1
                r[2] += deg[z] - 1

        o = [0] * EDGE_ORBITS
        o[0], o[1] = r[0], r[1]
        o[11] = int(k4[e])
        o[10] = (r[10] - 2 * o[11]) // 2
        o[9] = r[9] - 4 * o[11]
        o[8] = r[8] - o[9] - 4 * o[10] - 4 * o[11]
        o[7] = r[7] - o[9] - 2 * o[11]
        o[6] = (r[6] - o[9]) // 2
        o[5] = (r[5] - o[9]) // 2
        o[4] = (r[4] - 2 * o[6] - o[8] - o[9]) // 2
        o[3] = (r[3] - 2 * o[5] - o[8] - o[9]) // 2
        o[2] = r[2] - 2 * o[5] - 2 * o[6] - o[9]
        out[e - lo] = o
    return out


def _edge_counts(g: Graph, workers: int) -> tuple[np.ndarray, np.ndarray]:
    def build():
        indptr, indices, eid_at, sk_src, sk_dst = _skeleton_arrays(g)
        parts = parallel_map(
            _triangles_and_cliques, _ranges(len(sk_src), workers), workers, prefer="processes",
            args=(indptr, indices, eid_at, sk_src, sk_dst),
        )
        if not parts:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    return g.cached("orbit_tri_k4", build)


def node_orbit_counts(g: Graph, workers: Optional[int] = None) -> np.ndarray:
    """(n, 15) integer orbit counts."""
    def build():
        w = resolve_workers(workers)
        indptr, indices, eid_at, sk_src, sk_dst = _skeleton_arrays(g)
        tri, k4 = _edge_counts(g, w)
        k4_node = (np.bincount(sk_src, weights=k4, minlength=g.n)
                   + np.bincount(sk_dst, weights=k4, minlength=g.n)).astype(np.int64) // 3
        parts = parallel_map(
            _node_rows, _ranges(g.n, w), w, prefer="processes",
            args=(indptr, indices, eid_at, tri, k4_node),
        )
        out = np.concatenate(parts) if parts else np.zeros((0, NODE_ORBITS), dtype=np.int64)
        log.info("node_orbits_counted", n=g.n, workers=w)
        return out
    return g.cached(("orbits", "node"), build)


def edge_orbit_counts(g: Graph, workers: Optional[int] = None) -> np.ndarray:
    """(m, 12) integer orbit counts; self-loops get zeros, reciprocal arcs share counts."""
    def build():
        w = resolve_workers(workers)
        indptr, indices, eid_at, sk_src, sk_dst = _skeleton_arrays(g)
        tri, k4 = _edge_counts(g, w)
        parts = parallel_map(
            _edge_rows, _ranges(len(sk_src), w), w, prefer="processes",
            args=(indptr, indices, eid_at, sk_src, sk_dst, tri, k4),
        )
        per_skeleton = np.concatenate(parts) if parts else np.zeros((0, EDGE_ORBITS), dtype=np.int64)
        _, _, mapping = g.skeleton()
        out = np.zeros((g.m, EDGE_ORBITS), dtype=np.int64)
        hit = mapping >= 0
        out[hit] = per_skeleton[mapping[hit]]
        log.info("edge_orbits_counted", m=g.m, workers=w)
        return out
    return g.cached(("orbits", "edge"), build)
