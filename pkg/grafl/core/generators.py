# grafl/core/generators.py
"""Seeded synthetic graphs for benchmarks, tests and sanity experiments."""
from __future__ import annotations

import networkx as nx
import numpy as np

from grafl.core.graph import Graph


def erdos_renyi(n: int, avg_degree: float = 10.0, seed: int = 0, directed: bool = False) -> Graph:
    """
    G(n, m) with m = round(n * avg_degree / 2) distinct non-loop edges.

    Pairs are drawn in vectorised batches, so 10^6-node graphs build quickly.
    """
    rng = np.random.default_rng(seed)
    target = int(round(n * avg_degree / 2))
    max_pairs = n * (n - 1) if directed else n * (n - 1) // 2
    target = min(target, max_pairs)
    keys = np.zeros(0, dtype=np.int64)
    while len(keys) < target:
        need = target - len(keys)
        s = rng.integers(0, n, size=int(need * 1.2) + 16)
        d = rng.integers(0, n, size=len(s))
        ok = s != d
        s, d = s[ok], d[ok]
        if not directed:
            s, d = np.minimum(s, d), np.maximum(s, d)
        fresh = s * n + d
        merged = np.concatenate([keys, fresh])
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)][:target]
    return Graph.from_edges(keys // n, keys % n, n=n, directed=directed)


def stochastic_block_model(
    sizes: tuple[int, ...] = (100, 100),
    p_in: float = 0.15,
    p_out: float = 0.01,
    seed: int = 0,
) -> tuple[Graph, np.ndarray]:
    """Undirected SBM; returns the graph and the block label of every node."""
    k = len(sizes)
    probs = [[p_in if i == j else p_out for j in range(k)] for i in range(k)]
    G = nx.stochastic_block_model(list(sizes), probs, seed=seed)
    blocks = np.repeat(np.arange(k), sizes)
    return Graph.from_networkx(G), blocks


def power_law(n: int, m_attach: int = 3, seed: int = 0) -> Graph:
    """Barabasi-Albert preferential attachment graph."""
    return Graph.from_networkx(nx.barabasi_albert_graph(n, m_attach, seed=seed))
