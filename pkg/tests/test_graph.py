import networkx as nx
import numpy as np
import pytest

from grafl.core.generators import erdos_renyi
from grafl.core.graph import Graph, GraphElement, NeighborhoodSelector, neighborhood_matrix, neighbors


# ---------- Helpers ----------
def _make_path(n: int, directed: bool = True) -> Graph:
    return Graph.from_edges(list(range(n - 1)), list(range(1, n)), n=n, directed=directed)


def _make_triangle(directed: bool = False) -> Graph:
    return Graph.from_edges([0, 1, 2], [1, 2, 0], n=3, directed=directed)


def _naive_node_neighbors(g: Graph, v: int, direction: str, hops: int) -> list[int]:
    """BFS over plain python adjacency sets."""
    out = {u: set() for u in range(g.n)}
    inc = {u: set() for u in range(g.n)}
    for s, d in zip(g.src.tolist(), g.dst.tolist()):
        out[s].add(d)
        inc[d].add(s)
        if not g.directed:
            out[d].add(s)
            inc[s].add(d)
    if direction == "out":
        step = out
    elif direction == "in":
        step = inc
    else:
        step = {u: out[u] | inc[u] for u in range(g.n)}
    seen = {v}
    frontier = {v}
    for _ in range(hops):
        frontier = {w for u in frontier for w in step[u]} - seen
        seen |= frontier
    return sorted(seen - {v})


def _naive_edge_step(g: Graph, e: int, direction: str) -> set[int]:
    ends = {int(g.src[e]), int(g.dst[e])}
    result = set()
    for f in range(g.m):
        if f == e or g.src[f] == g.dst[f]:
            continue
        arcs = [(int(g.src[f]), int(g.dst[f]))]
        if not g.directed:
            arcs.append((int(g.dst[f]), int(g.src[f])))
        for s, d in arcs:
            if direction in ("out", "all") and s in ends:
                result.add(f)
            if direction in ("in", "all") and d in ends:
                result.add(f)
    return result


# ---------- Tests: construction ----------
def test_duplicates_collapse_and_weights_sum():
    g = Graph.from_edges([0, 0, 1], [1, 1, 2], weights=[2.0, 3.0, 1.0])
    assert g.n == 3
    assert g.m == 2
    assert g.weights.tolist() == [5.0, 1.0]


def test_undirected_pairs_are_canonical():
    g = Graph.from_edges([1, 0], [0, 1], n=2, directed=False)
    assert g.m == 1
    assert g.out_degree().tolist() == [1.0, 1.0]
    assert g.in_degree().tolist() == [1.0, 1.0]
    assert g.total_degree().tolist() == [1.0, 1.0]


def test_every_edge_id_once_per_direction():
    g = erdos_renyi(40, avg_degree=4, seed=3, directed=True)
    assert sorted(g.out_adj.edge_ids.tolist()) == list(range(g.m))
    assert sorted(g.in_adj.edge_ids.tolist()) == list(range(g.m))
    assert g.out_degree().sum() == g.in_degree().sum() == g.m


def test_self_loop_counts_once_each_way():
    g = Graph.from_edges([0, 0], [0, 1], n=2)
    assert g.out_degree().tolist() == [2.0, 0.0]
    assert g.in_degree().tolist() == [1.0, 1.0]
    # the loop never shows up as an edge neighbour
    assert neighbors(g, GraphElement("edge", 1), NeighborhoodSelector("all")).tolist() == []


def test_endpoint_out_of_range_rejected():
    with pytest.raises(ValueError):
        Graph(n=2, directed=True, src=np.array([0]), dst=np.array([5]))


def test_from_networkx_keeps_names():
    G = nx.Graph()
    G.add_edge("a", "b", weight=2.0)
    G.add_edge("b", "c", weight=1.5)
    g = Graph.from_networkx(G, weight="weight")
    assert g.node_names == ("a", "b", "c")
    assert not g.directed
    assert g.weights.tolist() == [2.0, 1.5]
    assert g.edge_index(g.node_index("c"), g.node_index("b")) == 1


def test_drop_edges_renumbers():
    g = _make_path(4)
    h = g.drop_edges(np.array([1]))
    assert h.n == 4
    assert h.m == 2
    assert list(zip(h.src.tolist(), h.dst.tolist())) == [(0, 1), (2, 3)]
    assert g.m == 3


# ---------- Tests: neighbourhoods ----------
def test_triangle_node_neighbours():
    g = _make_triangle()
    assert neighbors(g, GraphElement("node", 0), NeighborhoodSelector("all", 1)).tolist() == [1, 2]


def test_path_edge_out_neighbour():
    g = _make_path(3)
    assert neighbors(g, GraphElement("edge", 0), NeighborhoodSelector("out", 1)).tolist() == [1]


def test_path_two_hops():
    g = _make_path(4)
    assert neighbors(g, GraphElement("node", 0), NeighborhoodSelector("out", 2)).tolist() == [1, 2]


def test_out_of_bounds_element():
    g = _make_triangle()
    with pytest.raises(IndexError):
        neighbors(g, GraphElement("node", 3), NeighborhoodSelector())
    with pytest.raises(ValueError):
        GraphElement("face", 0)
    with pytest.raises(ValueError):
        NeighborhoodSelector("all", 0)


def test_one_hop_sizes_match_degrees():
    g = erdos_renyi(30, avg_degree=3, seed=7, directed=True)
    for v in range(g.n):
        out = neighbors(g, GraphElement("node", v), NeighborhoodSelector("out", 1))
        inc = neighbors(g, GraphElement("node", v), NeighborhoodSelector("in", 1))
        assert len(out) == g.out_degree()[v]
        assert len(inc) == g.in_degree()[v]


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("direction", ["out", "in", "all"])
def test_node_neighbours_match_bfs_oracle(seed, direction):
    g = erdos_renyi(25, avg_degree=2.5, seed=seed, directed=True)
    for hops in (1, 2, 3):
        sel = NeighborhoodSelector(direction, hops)
        M = neighborhood_matrix(g, "node", sel)
        for v in range(g.n):
            expected = _naive_node_neighbors(g, v, direction, hops)
            assert neighbors(g, GraphElement("node", v), sel).tolist() == expected
            assert M.indices[M.indptr[v]:M.indptr[v + 1]].tolist() == expected


@pytest.mark.parametrize("direction", ["out", "in", "all"])
def test_edge_neighbours_match_endpoint_rule(direction):
    g = erdos_renyi(20, avg_degree=3, seed=11, directed=True)
    sel = NeighborhoodSelector(direction, 1)
    for e in range(g.m):
        expected = sorted(_naive_edge_step(g, e, direction))
        assert neighbors(g, GraphElement("edge", e), sel).tolist() == expected


def test_edge_neighbours_expand_in_line_graph():
    g = _make_path(5)
    sel = NeighborhoodSelector("out", 2)
    # edge (0,1) -> (1,2) -> (2,3)
    assert neighbors(g, GraphElement("edge", 0), sel).tolist() == [1, 2]
    M = neighborhood_matrix(g, "edge", sel)
    assert M.indices[M.indptr[0]:M.indptr[1]].tolist() == [1, 2]


@pytest.mark.parametrize("kind", ["node", "edge"])
def test_undirected_selectors_coincide(kind):
    g = erdos_renyi(30, avg_degree=4, seed=5, directed=False)
    mats = [neighborhood_matrix(g, kind, NeighborhoodSelector(d, 1)) for d in ("out", "in", "all")]
    for other in mats[1:]:
        assert (mats[0] != other).nnz == 0
