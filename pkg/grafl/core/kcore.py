# grafl/core/kcore.py
"""k-core numbers by bucket peeling on the undirected skeleton."""
from __future__ import annotations

import numpy as np
from scipy import sparse

from grafl.core.graph import Graph


def skeleton_csr(g: Graph) -> sparse.csr_matrix:
    """Symmetric 0/1 adjacency of the simple undirected skeleton (no loops)."""
    def build():
        sk_src, sk_dst, _ = g.skeleton()
        rows = np.concatenate([sk_src, sk_dst])
        cols = np.concatenate([sk_dst, sk_src])
        mat = sparse.csr_matrix(
            (np.ones(len(rows), dtype=np.float64), (rows, cols)), shape=(g.n, g.n)
        )
        mat.sort_indices()
        return mat
    return g.cached("skeleton_csr", build)


def kcore_numbers(g: Graph) -> np.ndarray:
    """Core number per node (Batagelj-Zaversnik peeling, O(m))."""
    def build():
        adj = skeleton_csr(g)
        indptr, indices = adj.indptr, adj.indices
        deg = np.diff(indptr).astype(np.int64)
        n = g.n
        if n == 0:
            return np.zeros(0, dtype=np.int64)

        # Nodes sorted by degree, with bucket start offsets
        max_deg = int(deg.max(initial=0))
        bin_start = np.zeros(max_deg + 1, dtype=np.int64)
        np.cumsum(np.bincount(deg, minlength=max_deg + 1)[:-1], out=bin_start[1:])
        order = np.argsort(deg, kind="stable")
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)

        vert = order.tolist()
        pos_l = pos.tolist()
        deg_l = deg.tolist()
        bins = bin_start.tolist()
        ptr = indptr.tolist()
        nbr = indices.tolist()

        for i in range(n):
            v = vert[i]
            dv = deg_l[v]
            for u in nbr[ptr[v]:ptr[v + 1]]:
                du = deg_l[u]
                if du > dv:
                    # Swap u with the first node of its bucket, then shrink the bucket
                    pu = pos_l[u]
                    pw = bins[du]
                    w = vert[pw]
                    if u != w:
                        vert[pu], vert[pw] = w, u
                        pos_l[u], pos_l[w] = pw, pu
                    bins[du] += 1
                    deg_l[u] = du - 1
        return np.asarray(deg_l, dtype=np.int64)
    return g.cached("kcore", build)


def edge_kcore_numbers(g: Graph) -> np.ndarray:
    """Edge core number = min of its endpoints' core numbers."""
    core = kcore_numbers(g)
    return np.minimum(core[g.src], core[g.dst]) if g.m else np.zeros(0, dtype=np.int64)
