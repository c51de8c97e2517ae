"""Multi-layer word-embedding features.

Layered wordpiece embeddings are collapsed to one vector per token (sum over
layers, mean over a token's pieces), reduced with PCA, and clustered with
K-Means for every K in [2, k_max].  The partition whose clusters spread the
size-normalized influence the widest wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput
from .features import METHOD_MLWE, InterpretableFeature
from .gateway import LayeredEmbeddings

_EIGENVALUE_FLOOR = 1e-12
DEFAULT_MAX_COMPONENTS = 16
KMEANS_MAX_ITER = 100
KMEANS_SHIFT_TOL = 1e-6
# Restarts of the seeded k-means++ / Lloyd pipeline; the best final inertia
# wins.  One restart gets stuck in local optima often enough to distort the
# partition scores on small documents.
KMEANS_N_INIT = 10


@dataclass(frozen=True)
class TokenEmbeddingMatrix:
    rows: np.ndarray  # (t x d) or (t x c)
    token_positions: tuple[int, ...]

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[0] != len(self.token_positions):
            raise ValueError("row count must match token positions")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("embedding matrix must be finite")


@dataclass(frozen=True)
class PcaReduction:
    matrix: TokenEmbeddingMatrix
    eigenvalues: tuple[float, ...]
    explained_variance_ratio: tuple[float, ...]


@dataclass(frozen=True)
class Partition:
    k: int
    assignment: tuple[int, ...]
    clusters: tuple[InterpretableFeature, ...]
    inertia: float


def aggregate_layers(emb: LayeredEmbeddings) -> TokenEmbeddingMatrix:
    """Sum embeddings over layers, then average each token's pieces."""
    summed = np.sum(emb.layers, axis=0)
    t = len(emb.tokens)
    piece_to_token = np.asarray(emb.piece_to_token)
    rows = np.empty((t, summed.shape[1]))
    for token_index in range(t):
        rows[token_index] = summed[piece_to_token == token_index].mean(axis=0)
    return TokenEmbeddingMatrix(rows=rows, token_positions=tuple(range(t)))


def pca_reduce(matrix: TokenEmbeddingMatrix,
               max_components: int = DEFAULT_MAX_COMPONENTS) -> PcaReduction:
    """Mean-centered projection onto the top principal components.

    Keeps c = min(t, d, max_components) components, dropping near-zero
    eigenvalues but always retaining at least one.  Component signs are fixed
    by making the largest-magnitude loading positive, so projections are
    reproducible across BLAS builds.
    """
    X = matrix.rows
    t, d = X.shape
    centered = X - X.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = (singular**2) / t  # population covariance spectrum
    limit = min(t, d, max_components)
    keep = [i for i in range(limit) if eigenvalues[i] >= _EIGENVALUE_FLOOR]
    if keep:
        components = vt[keep]
        kept_eig = eigenvalues[keep]
    else:
        # zero-variance fallback: one arbitrary axis, all projections zero
        components = np.zeros((1, d))
        components[0, 0] = 1.0
        kept_eig = np.zeros(1)
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    total = eigenvalues.sum()
    ratio = tuple(kept_eig / total) if total > 0 else tuple(kept_eig)
    projected = centered @ components.T
    return PcaReduction(
        matrix=TokenEmbeddingMatrix(projected, matrix.token_positions),
        eigenvalues=tuple(float(e) for e in kept_eig),
        explained_variance_ratio=tuple(float(r) for r in ratio),
    )


def k_max(n_words: int) -> int:
    """Largest cluster count to try: floor(sqrt(n+1)) clamped to [2, n_words]."""
    if n_words < 0:
        raise ValueError("n_words must be non-negative")
    return max(2, min(int(np.sqrt(n_words + 1)), n_words))


def _plusplus_seed(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = [X[int(rng.integers(n))]]
    for _ in range(1, k):
        d2 = np.min([np.sum((X - c) ** 2, axis=1) for c in centroids], axis=0)
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids.append(X[idx])
    return np.array(centroids, dtype=float)


def _assign(X: np.ndarray, centroids: np.ndarray, k: int) -> np.ndarray:
    distances = np.linalg.norm(X[:, None, :] - centroids[None, :, :], axis=2)
    assignment = np.argmin(distances, axis=1)
    own = distances[np.arange(len(X)), assignment].copy()
    for j in range(k):
        if not np.any(assignment == j):
            # re-seed an empty cluster with the point farthest from its centroid
            farthest = int(np.argmax(own))
            assignment[farthest] = j
            own[farthest] = -np.inf
    return assignment


def _lloyd(X: np.ndarray, centroids: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    assignment = _assign(X, centroids, k)
    for _ in range(KMEANS_MAX_ITER):
        updated = np.array([X[assignment == j].mean(axis=0) for j in range(k)])
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        new_assignment = _assign(X, centroids, k)
        converged = np.array_equal(new_assignment, assignment) or shift < KMEANS_SHIFT_TOL
        assignment = new_assignment
        if converged:
            break
    return assignment, centroids


def _inertia(X: np.ndarray, assignment: np.ndarray, k: int) -> float:
    total = 0.0
    for j in range(k):
        members = X[assignment == j]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


def kmeans(matrix: TokenEmbeddingMatrix, k: int, seed: int,
           n_init: int = KMEANS_N_INIT) -> Partition:
    """Seeded k-means++ with Lloyd refinement; deterministic for a fixed seed.

    K is capped to the number of distinct rows.  Fewer than two distinct rows
    (or fewer than two rows at all) cannot be partitioned and raises
    DegenerateInput, which the explainer treats as "skip MLWE".
    """
    X = np.asarray(matrix.rows, dtype=float)
    t = X.shape[0]
    if t < 2:
        raise DegenerateInput(f"need at least 2 tokens to cluster, got {t}")
    distinct = np.unique(X, axis=0).shape[0]
    k = min(k, distinct)
    if k < 2:
        raise DegenerateInput("all embedding rows identical; nothing to cluster")
    rng = np.random.default_rng(seed)
    best: tuple[np.ndarray, float] | None = None
    for _ in range(n_init):
        assignment, _ = _lloyd(X, _plusplus_seed(X, k, rng), k)
        inertia = _inertia(X, assignment, k)
        if best is None or inertia < best[1] - 1e-12:
            best = (assignment, inertia)
    assignment, inertia = best
    clusters = []
    for j in range(k):
        positions = tuple(
            matrix.token_positions[i] for i in range(t) if assignment[i] == j
        )
        clusters.append(InterpretableFeature(METHOD_MLWE, f"mlwe-K{k}-c{j}", positions))
    return Partition(
        k=k,
        assignment=tuple(int(a) for a in assignment),
        clusters=tuple(clusters),
        inertia=inertia,
    )


def k_score(cluster_explanations: Sequence[tuple[float, int]]) -> float:
    """Spread of size-normalized cluster influences; always within [0, 2]."""
    if not cluster_explanations:
        raise ValueError("k_score needs at least one cluster")
    ratios = [npir / size for npir, size in cluster_explanations]
    return max(ratios) - min(ratios)


def select_best_partition(scored: Sequence[tuple[Partition, float]]) -> Partition:
    """Partition with the maximum score; ties go to the smallest K."""
    if not scored:
        raise ValueError("no partitions to select from")
    return max(scored, key=lambda pair: (pair[1], -pair[0].k))[0]
