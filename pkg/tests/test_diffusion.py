import numpy as np
import pytest

from grafl.core.generators import erdos_renyi
from grafl.core.graph import Graph
from grafl.features.descriptors import BaseFeatureDescriptor
from grafl.features.diffusion import diffuse, diffuse_column, diffuse_values, diffusion_operator
from grafl.features.functions import DiffusionStep, RelationalFunction, evaluate_function
from grafl.features.matrix import FeatureMatrix
from grafl.schemas.config import ConfigError, DiffusionConfig

TOTAL = RelationalFunction(BaseFeatureDescriptor("degree", "total"))


# ---------- Helpers ----------
def _pair() -> Graph:
    return Graph.from_edges([0], [1], directed=False)


def _cfg(**kwargs) -> DiffusionConfig:
    return DiffusionConfig.parse(kwargs)


# ---------- Tests ----------
def test_single_edge_swaps_values():
    out = diffuse_values(_pair(), "node", np.array([[1.0], [3.0]]), _cfg(iterations=1))
    assert out.tolist() == [[3.0], [1.0]]


@pytest.mark.parametrize("iterations", [1, 5, 20])
def test_constant_column_is_fixed_point(iterations):
    g = erdos_renyi(50, avg_degree=6, seed=1)
    out = diffuse_values(g, "node", np.ones((g.n, 1)), _cfg(iterations=iterations))
    assert np.allclose(out, 1.0)


def test_theta_one_keeps_input():
    g = erdos_renyi(30, avg_degree=4, seed=2)
    x = np.random.default_rng(0).random((g.n, 2))
    out = diffuse_values(g, "node", x, _cfg(method="laplacian", theta=1.0, iterations=7))
    np.testing.assert_array_equal(out, x)


def test_infinite_tolerance_is_a_no_op():
    g = erdos_renyi(30, avg_degree=4, seed=3)
    x = np.random.default_rng(1).random((g.n, 3))
    out = diffuse_values(g, "node", x, _cfg(tol=float("inf"), iterations=5))
    np.testing.assert_array_equal(out, x)


def test_row_stochastic_stays_in_bounds():
    g = erdos_renyi(60, avg_degree=5, seed=4, directed=True)
    x = np.random.default_rng(2).random(g.n) * 10
    out = diffuse_column(diffusion_operator(g, "node", "row-stochastic"), x, DiffusionStep(iterations=4))
    assert out.min() >= x.min() - 1e-12
    assert out.max() <= x.max() + 1e-12


def test_isolated_nodes_pass_through():
    g = Graph.from_edges([0], [1], n=3, directed=False)
    out = diffuse_values(g, "node", np.array([[1.0], [3.0], [7.0]]), _cfg(iterations=3))
    assert out[2, 0] == 7.0


def test_laplacian_step():
    # path 0-1-2: L x for x = [1, 0, 0] is [1, -1/sqrt(2), 0]
    g = Graph.from_edges([0, 1], [1, 2], directed=False)
    out = diffuse_values(g, "node", np.array([[1.0], [0.0], [0.0]]), _cfg(method="laplacian", theta=0.5, iterations=1))
    expected = 0.5 * np.array([1.0, -1.0 / np.sqrt(2.0), 0.0]) + 0.5 * np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(out[:, 0], expected)


def test_edge_diffusion_uses_line_graph():
    # path 0->1->2: edge 0's out-neighbour is edge 1, which has none
    g = Graph.from_edges([0, 1], [1, 2], directed=True)
    out = diffuse_values(g, "edge", np.array([[1.0], [5.0]]), _cfg(iterations=1))
    assert out[:, 0].tolist() == [5.0, 5.0]


def test_invalid_theta():
    with pytest.raises(ConfigError):
        _cfg(theta=1.5)
    with pytest.raises(ConfigError):
        diffuse_column(diffusion_operator(_pair(), "node", "laplacian"), np.ones(2), DiffusionStep(theta=-0.1))


def test_row_mismatch():
    with pytest.raises(ValueError, match="rows"):
        diffuse_values(_pair(), "node", np.ones((3, 1)), _cfg())


def test_append_wraps_definitions():
    g = erdos_renyi(20, avg_degree=4, seed=5)
    X = FeatureMatrix("node", evaluate_function(g, TOTAL)[:, None], (TOTAL,))
    out = diffuse(g, X, _cfg(attach="append", iterations=2))
    assert out.shape == (g.n, 2)
    assert out.functions[1].chain[-1].is_diffusion
    assert out.functions[1].depth == 1
    assert out.names()[1] == "degree:total|diffuse[row-stochastic]"
    # the recorded step replays to the same column
    np.testing.assert_allclose(evaluate_function(g, out.functions[1]), out.values[:, 1])


def test_replace_with_binning():
    g = erdos_renyi(40, avg_degree=4, seed=6)
    X = FeatureMatrix("node", evaluate_function(g, TOTAL)[:, None], (TOTAL,))
    out = diffuse(g, X, _cfg(attach="replace", iterations=3), alpha=0.5)
    assert out.shape == (g.n, 1)
    assert out.functions[0].transform.bins == int(out.values[:, 0].max()) + 1
    assert set(np.unique(out.values[:, 0])) <= set(range(out.functions[0].transform.bins))
