import numpy as np
import pytest
from scipy import sparse

from grafl.core.generators import erdos_renyi
from grafl.core.graph import GraphElement, NeighborhoodSelector, neighborhood_matrix, neighbors
from grafl.features.binning import bin_count, log_bin
from grafl.features.operators import RelationalOperator, apply_matrix, apply_operator
from grafl.schemas.config import ALL_OPERATORS, ConfigError


# ---------- Helpers ----------
def _make_operator(tag: str) -> RelationalOperator:
    if tag == "weighted-lp":
        return RelationalOperator(tag, p=2.0)
    if tag == "rbf":
        return RelationalOperator(tag, sigma=2.0)
    return RelationalOperator(tag)


# ---------- Tests: single-element operators ----------
def test_sum_over_neighbourhood_and_its_parts():
    x = np.array([0.0, 4.0, 3.0, 5.0, 4.0, 3.0])
    op = RelationalOperator("sum")
    assert apply_operator(op, [1, 2, 3, 4, 5], x) == 19.0
    assert apply_operator(op, [2, 4], x) == 7.0
    assert apply_operator(op, [1, 3, 5], x) == 12.0


def test_rbf_identity():
    x = np.array([2.0, 2.0])
    assert apply_operator(RelationalOperator("rbf", sigma=1.0), [1], x, self_value=x[0]) == 1.0


def test_mean():
    assert apply_operator(RelationalOperator("mean"), [0, 1], np.array([2.0, 4.0])) == 3.0


def test_weighted_lp_and_max_and_product():
    x = np.array([1.0, 3.0, -2.0])
    assert apply_operator(RelationalOperator("weighted-lp", p=2.0), [1, 2], x, self_value=x[0]) == 4.0 + 9.0
    assert apply_operator(RelationalOperator("max"), [1, 2], x) == 3.0
    assert apply_operator(RelationalOperator("hadamard"), [0, 1, 2], x) == -6.0


@pytest.mark.parametrize("tag", ["sum", "mean", "max", "hadamard", "weighted-lp"])
def test_empty_set_gives_zero(tag):
    x = np.array([5.0])
    assert apply_operator(_make_operator(tag), [], x, self_value=5.0) == 0.0


def test_empty_set_rbf_gives_one():
    assert apply_operator(RelationalOperator("rbf"), [], np.array([5.0]), self_value=5.0) == 1.0


def test_product_saturates():
    x = np.full(4, 1e200)
    assert apply_operator(RelationalOperator("hadamard"), [0, 1, 2, 3], x) == np.finfo(np.float64).max


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        RelationalOperator("weighted-lp", p=0.5)
    with pytest.raises(ConfigError):
        RelationalOperator("rbf", sigma=0.0)
    with pytest.raises(ConfigError):
        RelationalOperator("median")


# ---------- Tests: whole-graph evaluation ----------
@pytest.mark.parametrize("tag", ALL_OPERATORS)
@pytest.mark.parametrize("kind", ["node", "edge"])
def test_matrix_form_matches_per_element(tag, kind):
    g = erdos_renyi(40, avg_degree=3, seed=13, directed=True)
    rng = np.random.default_rng(1)
    x = rng.integers(0, 4, size=g.size(kind)).astype(np.float64)
    op = _make_operator(tag)
    for direction in ("out", "in", "all"):
        sel = NeighborhoodSelector(direction, 1)
        got = apply_matrix(op, neighborhood_matrix(g, kind, sel), x)
        for i in range(g.size(kind)):
            S = neighbors(g, GraphElement(kind, i), sel)
            assert got[i] == pytest.approx(apply_operator(op, S, x, self_value=x[i]))


def test_matrix_empty_rows():
    M = sparse.csr_matrix((2, 2))
    x = np.array([1.0, 2.0])
    assert apply_matrix(RelationalOperator("hadamard"), M, x).tolist() == [0.0, 0.0]
    assert apply_matrix(RelationalOperator("rbf"), M, x).tolist() == [1.0, 1.0]


# ---------- Tests: logarithmic binning ----------
def test_log_bin_example():
    assert log_bin(np.array([5.0, 1.0, 3.0, 2.0, 4.0]), 0.5).tolist() == [2, 0, 0, 0, 1]


def test_log_bin_constant_and_pair():
    assert log_bin(np.full(7, 3.0), 0.5).tolist() == [0] * 7
    assert log_bin(np.array([1.0, 2.0]), 0.5).tolist() == [0, 1]
    assert log_bin(np.zeros(0), 0.5).tolist() == []


def test_log_bin_ties_share_bin():
    # 2 of 4 in bin 0 would split the tied 1.0 values
    assert log_bin(np.array([1.0, 1.0, 1.0, 9.0]), 0.5).tolist() == [0, 0, 0, 1]


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_log_bin_rejects_alpha(alpha):
    with pytest.raises(ConfigError):
        log_bin(np.array([1.0]), alpha)


@pytest.mark.parametrize("seed", range(5))
def test_log_bin_properties(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 20, size=200).astype(np.float64)
    bins = log_bin(x, 0.3)
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(bins[order]) >= 0)
    assert set(bins.tolist()) == set(range(bin_count(bins)))
    for v in np.unique(x):
        assert len(set(bins[x == v].tolist())) == 1
    # rank-only dependence
    np.testing.assert_array_equal(log_bin(np.exp(x / 3.0) - 7.0, 0.3), bins)
