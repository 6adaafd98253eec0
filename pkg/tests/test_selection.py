from itertools import permutations

import numpy as np
import pytest
from sklearn.metrics import mutual_info_score

from grafl.schemas.config import ConfigError
from grafl.selection.pruning import (
    EvaluationCriterion,
    agreement_score,
    dependence_graph,
    pairwise_agreement,
    prune_layer,
)
from grafl.selection.supervised import mutual_information, supervised_select


# ---------- Helpers ----------
def _random_bins(rows: int, cols: int, seed: int, top: int = 4) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, top, size=(rows, cols)).astype(np.float64)


def _objective(order: list[int], X: np.ndarray, y: np.ndarray, beta: float) -> list[float]:
    """Greedy objective values along a given pick order, recomputed from scratch."""
    values = []
    for pos, i in enumerate(order):
        red = sum(mutual_information(X[:, i], X[:, j]) for j in order[:pos])
        values.append(mutual_information(X[:, i], y) - beta * red)
    return values


# ---------- Tests: agreement ----------
def test_agreement_examples():
    assert agreement_score([0, 1, 1, 2], [0, 1, 2, 2]) == 0.75
    assert agreement_score([3, 1], [3, 1]) == 1.0
    assert agreement_score([0, 0], [1, 1]) == 0.0
    assert agreement_score([], []) == 1.0


def test_agreement_length_mismatch():
    with pytest.raises(ValueError):
        agreement_score([0, 1], [0])


def test_pairwise_agreement_matches_scalar():
    A = _random_bins(50, 4, seed=1)
    B = _random_bins(50, 3, seed=2)
    got = pairwise_agreement(A, B)
    for i in range(4):
        for j in range(3):
            assert got[i, j] == pytest.approx(agreement_score(A[:, i], B[:, j]))
    np.testing.assert_allclose(pairwise_agreement(A, A), pairwise_agreement(A, A).T)


def test_criterion_validation():
    with pytest.raises(ConfigError):
        EvaluationCriterion("agreement", 1.5)
    with pytest.raises(ConfigError):
        EvaluationCriterion("cosine", 0.5)
    assert EvaluationCriterion("mutual-information", 2.0).lam == 2.0


# ---------- Tests: pruning ----------
def test_duplicate_of_history_dropped():
    hist = _random_bins(40, 2, seed=3)
    new = np.column_stack([hist[:, 1], _random_bins(40, 1, seed=4)[:, 0]])
    assert prune_layer(new, hist, EvaluationCriterion("agreement", 0.9)) == [1]


def test_identical_new_columns_keep_earliest():
    col = _random_bins(40, 1, seed=5)[:, 0]
    other = _random_bins(40, 1, seed=6)[:, 0]
    new = np.column_stack([other, col, col])
    assert prune_layer(new, None, EvaluationCriterion("agreement", 0.9)) == [0, 1]


def test_nothing_dependent_keeps_everything():
    new = np.column_stack([np.zeros(6), np.ones(6), np.full(6, 2.0)])
    assert prune_layer(new, None, EvaluationCriterion("agreement", 0.5)) == [0, 1, 2]


def test_empty_layer():
    assert prune_layer(np.zeros((5, 0)), _random_bins(5, 2, seed=0), EvaluationCriterion()) == []


def test_transitive_component_keeps_one():
    a = np.array([0, 0, 0, 0, 1, 1, 1, 1, 2, 2], dtype=float)
    b = a.copy()
    b[:2] = 5  # agrees with a on 0.8
    c = b.copy()
    c[8:] = 5  # agrees with b on 0.8, with a on 0.6
    graph = dependence_graph(np.column_stack([a, b, c]), None, EvaluationCriterion("agreement", 0.7))
    assert graph.retained_new() == [0]
    assert [(i, j) for i, j, _ in graph.edges()] == [(0, 1), (1, 2)]


def test_every_component_contributes_one_vertex():
    new = _random_bins(30, 12, seed=7, top=2)
    hist = _random_bins(30, 4, seed=8, top=2)
    graph = dependence_graph(new, hist, EvaluationCriterion("agreement", 0.6))
    reps = graph.representatives()
    assert len(reps) == len(set(graph.labels.tolist()))
    for r in reps:
        members = np.flatnonzero(graph.labels == graph.labels[r])
        assert r == members.min()


def test_pruning_independent_of_workers():
    new = _random_bins(200, 40, seed=9, top=3)
    hist = _random_bins(200, 10, seed=10, top=3)
    crit = EvaluationCriterion("agreement", 0.4)
    assert prune_layer(new, hist, crit, workers=1) == prune_layer(new, hist, crit, workers=4)


def test_injected_duplicates_always_pruned():
    rng = np.random.default_rng(2024)
    crit = EvaluationCriterion("agreement", 0.9)
    for trial in range(100):
        hist = _random_bins(80, int(rng.integers(0, 4)), seed=trial)
        columns = [(col, False) for col in _random_bins(80, int(rng.integers(1, 7)), seed=1000 + trial).T]
        for _ in range(int(rng.integers(1, 6))):
            if hist.shape[1] and rng.random() < 0.5:
                source, first = hist[:, rng.integers(hist.shape[1])], 0
            else:
                p = int(rng.integers(len(columns)))
                source, first = columns[p][0], p + 1
            columns.insert(int(rng.integers(first, len(columns) + 1)), (source.copy(), True))

        new = np.column_stack([col for col, _ in columns])
        expected = [i for i, (_, copy) in enumerate(columns) if not copy]
        history = hist if hist.shape[1] else None
        for workers in (1, 2, 8):
            assert prune_layer(new, history, crit, workers=workers) == expected, (trial, workers)


def test_mutual_information_criterion():
    col = _random_bins(60, 1, seed=11)[:, 0]
    new = np.column_stack([col, col, (col + 1) % 4])
    # a relabelled copy carries the same information
    assert prune_layer(new, None, EvaluationCriterion("mutual-information", 0.5)) == [0]


# ---------- Tests: supervised selection ----------
@pytest.mark.parametrize("seed", range(3))
def test_mutual_information_matches_sklearn(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 5, size=300)
    y = (x + rng.integers(0, 3, size=300)) % 4
    assert mutual_information(x, y) == pytest.approx(mutual_info_score(y, x))


def test_mutual_information_edge_cases():
    assert mutual_information([], []) == 0.0
    assert mutual_information([1, 1, 1], [0, 1, 2]) == 0.0
    with pytest.raises(ValueError):
        mutual_information([1], [1, 2])


def test_beta_zero_is_plain_ranking():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 3, size=200)
    X = np.column_stack([rng.integers(0, 3, size=200), y, (y + (rng.random(200) < 0.3)) % 3, np.zeros(200)])
    relevance = [mutual_information(X[:, i], y) for i in range(4)]
    expected = sorted(range(4), key=lambda i: (-relevance[i], i))[:2]
    assert supervised_select(X, y, beta=0.0, k=2) == expected


def test_label_copy_selected_first():
    rng = np.random.default_rng(4)
    y = rng.integers(0, 2, size=100)
    X = np.column_stack([rng.integers(0, 4, size=100), y * 3, rng.integers(0, 2, size=100)])
    assert supervised_select(X, y, beta=1.0, k=1) == [1]


def test_duplicate_of_seed_ranked_last():
    rng = np.random.default_rng(5)
    y = rng.integers(0, 2, size=400)
    seed_col = np.where(rng.random(400) < 0.9, y, 1 - y)
    X = np.column_stack([
        seed_col,
        seed_col,
        np.where(rng.random(400) < 0.7, y, 1 - y),
        rng.integers(0, 2, size=400),
    ])
    picked = supervised_select(X, y, beta=5.0, k=4)
    assert picked[0] == 0
    assert picked[-1] == 1
    # the greedy order is the brute-force best at every step
    for pos in range(1, 4):
        best = max(
            (o for o in permutations(range(4)) if list(o[:pos]) == picked[:pos]),
            key=lambda o: _objective(list(o), X, y, 5.0)[pos],
        )
        assert best[pos] == picked[pos]


def test_budget_larger_than_features_returns_all():
    X = _random_bins(20, 3, seed=1)
    y = np.arange(20) % 2
    assert sorted(supervised_select(X, y, k=10)) == [0, 1, 2]


def test_masked_labels_ignored():
    y = np.array([0, 1, 0, 1, -1, -1])
    X = np.column_stack([[0, 1, 0, 1, 7, 3], [5, 5, 5, 5, 5, 5]])
    assert supervised_select(X, y, beta=0.0, k=1) == [0]


def test_min_score_stops_selection():
    y = np.array([0, 1] * 10)
    X = np.column_stack([y, y])
    assert supervised_select(X, y, beta=1.0, k=2, min_score=0.0) == [0]
