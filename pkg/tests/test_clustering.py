"""K-means, silhouette selection, and cluster utilities against brute force."""

import numpy as np
import pytest

from careercast.clustering import (
    ClusterModel,
    assign,
    kmeans_fit,
    one_hot,
    purity,
    select_k,
    silhouette_score,
)
from careercast.errors import ParameterError, ShapeError


def exhaustive_two_cluster_sse(points):
    """Minimum SSE over every bipartition (last point pinned to one side)."""
    n = len(points)
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        sel = np.array([(mask >> i) & 1 for i in range(n - 1)] + [0], dtype=bool)
        sse = sum(
            float(((side - side.mean(axis=0)) ** 2).sum())
            for side in (points[sel], points[~sel])
        )
        best = min(best, sse)
    return best


def silhouette_reference(points, assignments):
    """Direct per-point loops over the full distance matrix."""
    n = len(points)
    labels = np.unique(assignments)
    if labels.size < 2:
        return 0.0
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    scores = []
    for i in range(n):
        same = [j for j in range(n) if assignments[j] == assignments[i] and j != i]
        if not same:
            scores.append(0.0)
            continue
        a = float(np.mean([d[i, j] for j in same]))
        b = min(
            float(np.mean([d[i, j] for j in range(n) if assignments[j] == c]))
            for c in labels
            if c != assignments[i]
        )
        denom = max(a, b)
        scores.append((b - a) / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def test_kmeans_matches_exhaustive_bipartition():
    for i in range(10):
        rng = np.random.default_rng(100 + i)
        n, dim = 4 + i % 5, 1 + i % 4
        points = rng.normal(size=(n, dim))
        result = kmeans_fit(points, 2, restarts=50, seed=i)
        assert result.inertia == pytest.approx(
            exhaustive_two_cluster_sse(points), rel=1e-9, abs=1e-12
        )


def test_silhouette_matches_direct_loops():
    rng = np.random.default_rng(0)
    points = np.vstack(
        [rng.normal(size=(12, 3)) + off for off in ([0, 0, 0], [4, 0, 0], [0, 5, 0])]
    )
    for k in (2, 3, 4):
        labels = kmeans_fit(points, k, restarts=5, seed=k).assignments
        assert silhouette_score(points, labels) == pytest.approx(
            silhouette_reference(points, labels), abs=1e-10
        )


def test_silhouette_edge_cases():
    points = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 0.0], [10.0, 0.0]])
    assert silhouette_score(points, np.array([0, 0, 0, 0])) == 0.0
    # all singletons score zero
    assert silhouette_score(points[:2], np.array([0, 1])) == 0.0
    # tight duplicate pairs far apart: perfect separation
    assert silhouette_score(points, np.array([0, 0, 1, 1])) == 1.0
    with pytest.raises(ShapeError):
        silhouette_score(points, np.array([0, 0, 1]))


def test_select_k_finds_three_blobs_and_breaks_ties_low():
    rng = np.random.default_rng(1)
    points = np.vstack(
        [rng.normal(size=(15, 4)) * 0.2 + c for c in (-6.0, 0.0, 6.0)]
    )
    model = select_k(points, player_ids=[f"p{i}" for i in range(45)], k_range=range(2, 6), seed=0)
    assert model.k == 3
    assert sorted(model.silhouette_by_k) == [2, 3, 4, 5]
    best = max(model.silhouette_by_k.values())
    assert model.k == min(k for k, s in model.silhouette_by_k.items() if s == best)
    assert purity(model.train_assignments, np.repeat([0, 1, 2], 15)) == 1.0


def test_select_k_skips_infeasible_candidates():
    points = np.array([[0.0], [1.0], [10.0]])
    model = select_k(points, k_range=range(2, 9), seed=0)
    assert sorted(model.silhouette_by_k) == [2, 3]
    with pytest.raises(ParameterError):
        select_k(points[:1], k_range=range(2, 4))
    with pytest.raises(ParameterError):
        select_k(points, k_range=[])


def test_assign_breaks_ties_to_lowest_index():
    centroids = np.array([[-1.0, 0.0], [1.0, 0.0]])
    labels = assign(np.array([[0.0, 0.0], [0.9, 0.0]]), centroids)
    assert labels.tolist() == [0, 1]


def test_one_hot():
    out = one_hot(np.array([2, 0, 1]), 3)
    assert np.array_equal(out, np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float))
    assert np.array_equal(one_hot(np.array([], dtype=int), 2), np.zeros((0, 2)))
    with pytest.raises(ParameterError):
        one_hot(np.array([0, 3]), 3)
    with pytest.raises(ParameterError):
        one_hot(np.array([-1]), 2)
    with pytest.raises(ShapeError):
        one_hot(np.zeros((2, 2), dtype=int), 2)


def test_purity_hand_cases():
    assert purity(np.array([0, 0, 1, 1]), np.array(["a", "b", "b", "b"])) == 0.75
    assert purity(np.array([1, 1, 0]), np.array(["x", "x", "y"])) == 1.0
    with pytest.raises(ShapeError):
        purity(np.array([0, 1]), np.array(["a"]))
    with pytest.raises(ParameterError):
        purity(np.array([], dtype=int), np.array([]))


def test_kmeans_is_deterministic_and_restarts_help():
    rng = np.random.default_rng(2)
    points = rng.normal(size=(30, 3))
    a = kmeans_fit(points, 4, restarts=5, seed=7)
    b = kmeans_fit(points, 4, restarts=5, seed=7)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.assignments, b.assignments)
    # restart r draws from the same substream regardless of the total count,
    # so more restarts can only improve the kept inertia
    single = kmeans_fit(points, 4, restarts=1, seed=7)
    assert a.inertia <= single.inertia


def test_duplicate_points_keep_all_clusters_occupied():
    base = np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]])
    points = np.repeat(base, 4, axis=0)
    result = kmeans_fit(points, 3, restarts=10, seed=0)
    counts = np.bincount(result.assignments, minlength=3)
    assert counts.tolist() == [4, 4, 4]
    assert result.inertia == 0.0


def test_kmeans_parameter_errors():
    points = np.zeros((3, 2))
    with pytest.raises(ParameterError):
        kmeans_fit(points, 0)
    with pytest.raises(ParameterError):
        kmeans_fit(points, 4)
    with pytest.raises(ParameterError):
        kmeans_fit(points, 2, restarts=0)
    with pytest.raises(ShapeError):
        kmeans_fit(np.zeros(3), 2)
    bad = points.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ParameterError):
        kmeans_fit(bad, 2)


def test_cluster_model_doc_round_trip():
    rng = np.random.default_rng(3)
    points = np.vstack([rng.normal(size=(10, 2)) - 3, rng.normal(size=(10, 2)) + 3])
    model = select_k(points, player_ids=[str(i) for i in range(20)], k_range=range(2, 5), seed=1)
    loaded = ClusterModel.from_doc(model.to_doc())
    assert loaded.k == model.k
    assert np.array_equal(loaded.centroids, model.centroids)
    assert np.array_equal(loaded.train_assignments, model.train_assignments)
    assert loaded.silhouette_by_k == model.silhouette_by_k
    assert loaded.train_player_ids == model.train_player_ids
    probe = rng.normal(size=(6, 2))
    assert np.array_equal(loaded.assign(probe), model.assign(probe))
