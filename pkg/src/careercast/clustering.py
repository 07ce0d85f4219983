"""K-means career-type clustering over autoencoder embeddings.

Centroids are fit with k-means++ seeding and several restarts, keeping
the lowest-inertia run. The number of clusters is chosen by mean
silhouette over a candidate range, smaller K winning ties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .errors import ParameterError, ShapeError

DEFAULT_K_RANGE = range(2, 9)
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITERS = 300


def _check_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ShapeError(f"expected (n, d) points, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise ParameterError("points contain non-finite values")
    return points


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n_points, n_centroids)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid for each point (ties to the lowest index)."""
    points = _check_points(points)
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim != 2 or centroids.shape[1] != points.shape[1]:
        raise ShapeError(
            f"centroid shape {centroids.shape} does not match points "
            f"{points.shape}"
        )
    return np.argmin(_sq_dists(points, centroids), axis=1)


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=float)
    centroids[0] = points[int(rng.integers(n))]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining points coincide with a chosen centroid
            idx = int(rng.integers(n))
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(points, centroids, assignments, k):
    """Re-seat empty clusters on the points farthest from their centroids."""
    for _ in range(k):
        counts = np.bincount(assignments, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            break
        d2 = ((points - centroids[assignments]) ** 2).sum(axis=1)
        centroids = centroids.copy()
        assignments = assignments.copy()
        for j in empties:
            counts = np.bincount(assignments, minlength=k)
            # never steal the last member of another cluster
            eligible = counts[assignments] > 1
            candidate = np.where(eligible, d2, -1.0)
            p = int(np.argmax(candidate))
            centroids[j] = points[p]
            assignments[p] = j
            d2[p] = 0.0
    return centroids, assignments


def _lloyd(points, centroids, k, max_iters):
    prev = None
    for _ in range(max_iters):
        assignments = assign(points, centroids)
        centroids, assignments = _repair_empty(points, centroids, assignments, k)
        if prev is not None and np.array_equal(assignments, prev):
            break
        prev = assignments
        centroids = np.stack(
            [points[assignments == j].mean(axis=0) for j in range(k)]
        )
    # re-derive assignments so stored centroids reproduce them exactly
    assignments = assign(points, centroids)
    centroids, assignments = _repair_empty(points, centroids, assignments, k)
    inertia = float(((points - centroids[assignments]) ** 2).sum())
    return centroids, assignments, inertia


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float


def kmeans_fit(
    points: np.ndarray,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 0,
) -> KMeansResult:
    """Best of ``restarts`` k-means++ runs by inertia (earlier run wins ties)."""
    points = _check_points(points)
    n = points.shape[0]
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    if n < k:
        raise ParameterError(f"need at least k={k} points, got {n}")
    if restarts < 1 or max_iters < 1:
        raise ParameterError("restarts and max_iters must be at least 1")
    best = None
    for r in range(restarts):
        rng = rngmod.substream(seed, f"kmeans.restart.{r}")
        init = _plus_plus_init(points, k, rng)
        centroids, assignments, inertia = _lloyd(points, init, k, max_iters)
        if best is None or inertia < best.inertia:
            best = KMeansResult(centroids, assignments, inertia)
    return best


def silhouette_score(points: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette over all points, Euclidean distance.

    Singleton-cluster points score 0, as does any point whose within and
    between distances are both 0. Fewer than two occupied clusters gives
    0 overall.
    """
    points = _check_points(points)
    assignments = np.asarray(assignments)
    n = points.shape[0]
    if assignments.shape != (n,):
        raise ShapeError(
            f"assignments shape {assignments.shape} does not match {n} points"
        )
    labels = np.unique(assignments)
    if labels.size < 2:
        return 0.0
    k = int(assignments.max()) + 1
    counts = np.bincount(assignments, minlength=k)
    dists = np.sqrt(np.maximum(_sq_dists(points, points), 0.0))
    onehot = np.zeros((n, k), dtype=float)
    onehot[np.arange(n), assignments] = 1.0
    cluster_sums = dists @ onehot
    scores = np.zeros(n, dtype=float)
    for i in range(n):
        c = assignments[i]
        if counts[c] < 2:
            continue
        a = cluster_sums[i, c] / (counts[c] - 1)
        b = np.inf
        for j in range(k):
            if j == c or counts[j] == 0:
                continue
            b = min(b, cluster_sums[i, j] / counts[j])
        denom = max(a, b)
        if denom > 0.0:
            scores[i] = (b - a) / denom
    return float(scores.mean())


@dataclass
class ClusterModel:
    """Selected clustering: chosen K, centroids, and the selection trace."""

    k: int
    centroids: np.ndarray
    train_assignments: np.ndarray
    inertia: float
    silhouette_by_k: dict = field(default_factory=dict)
    train_player_ids: tuple = ()

    def assign(self, points: np.ndarray) -> np.ndarray:
        return assign(points, self.centroids)

    def to_doc(self) -> dict:
        return {
            "k": int(self.k),
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "train_assignments": [int(a) for a in self.train_assignments],
            "inertia": float(self.inertia),
            "silhouette_by_k": {
                str(kk): float(s) for kk, s in sorted(self.silhouette_by_k.items())
            },
            "train_player_ids": list(self.train_player_ids),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ClusterModel":
        return cls(
            k=int(doc["k"]),
            centroids=np.array(doc["centroids"], dtype=float),
            train_assignments=np.array(doc["train_assignments"], dtype=int),
            inertia=float(doc["inertia"]),
            silhouette_by_k={int(kk): float(s) for kk, s in doc["silhouette_by_k"].items()},
            train_player_ids=tuple(doc["train_player_ids"]),
        )


def select_k(
    embeddings: np.ndarray,
    player_ids=(),
    k_range=DEFAULT_K_RANGE,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 0,
) -> ClusterModel:
    """Fit k-means for each candidate K and keep the best mean silhouette.

    Candidates needing more centroids than there are points are skipped.
    Exact silhouette ties go to the smaller K.
    """
    embeddings = _check_points(embeddings)
    ks = [int(k) for k in k_range]
    if not ks:
        raise ParameterError("k_range is empty")
    best_k = None
    best_fit = None
    table = {}
    for k in sorted(ks):
        if k > embeddings.shape[0]:
            continue
        fit = kmeans_fit(
            embeddings, k, restarts=restarts, max_iters=max_iters, seed=seed
        )
        score = silhouette_score(embeddings, fit.assignments)
        table[k] = score
        if best_k is None or score > table[best_k]:
            best_k = k
            best_fit = fit
    if best_k is None:
        raise ParameterError(
            f"no candidate K in {ks} is feasible for {embeddings.shape[0]} points"
        )
    return ClusterModel(
        k=best_k,
        centroids=best_fit.centroids,
        train_assignments=best_fit.assignments,
        inertia=best_fit.inertia,
        silhouette_by_k=table,
        train_player_ids=tuple(player_ids),
    )


def one_hot(assignments: np.ndarray, k: int) -> np.ndarray:
    assignments = np.asarray(assignments, dtype=int)
    if assignments.ndim != 1:
        raise ShapeError(f"expected 1-d assignments, got shape {assignments.shape}")
    if assignments.size and (assignments.min() < 0 or assignments.max() >= k):
        raise ParameterError(
            f"assignment outside [0, {k}) found: "
            f"min {assignments.min()}, max {assignments.max()}"
        )
    out = np.zeros((assignments.size, k), dtype=float)
    out[np.arange(assignments.size), assignments] = 1.0
    return out


def purity(assignments: np.ndarray, labels) -> float:
    """Fraction of points whose cluster's majority label matches their own."""
    assignments = np.asarray(assignments)
    labels = np.asarray(labels)
    if assignments.shape != labels.shape or assignments.ndim != 1:
        raise ShapeError(
            f"assignments {assignments.shape} and labels {labels.shape} "
            "must be matching 1-d arrays"
        )
    if assignments.size == 0:
        raise ParameterError("purity of an empty assignment is undefined")
    total = 0
    for c in np.unique(assignments):
        _, counts = np.unique(labels[assignments == c], return_counts=True)
        total += int(counts.max())
    return total / assignments.size
