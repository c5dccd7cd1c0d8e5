"""Shared fixtures and synthetic data helpers."""

from __future__ import annotations

import numpy as np
import pytest


def random_unit_vectors(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """n random unit vectors, float64."""
    x = rng.normal(size=(n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def clustered_unit_vectors(
    rng: np.random.Generator,
    n: int,
    dim: int,
    n_clusters: int,
    noise: float = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors in well-separated clusters.

    Cluster centers are random unit vectors; members are center + noise
    Gaussian, renormalized. Returns (vectors, labels) with labels[i] the
    cluster of row i. Rows cycle through clusters so any prefix is
    label-balanced.
    """
    centers = random_unit_vectors(rng, n_clusters, dim)
    labels = np.arange(n) % n_clusters
    x = centers[labels] + noise * rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x, labels


def brute_force_top_k(
    matrix: np.ndarray, q: np.ndarray, k: int
) -> list[tuple[int, float]]:
    """Independent exact top-k oracle: row-at-a-time scan, Python sort.

    Returns [(row, score)] sorted by descending score, ties by ascending
    row. Shares no code with FlatIndex (per-row dot, full list sort) so it
    cannot share a bug with it.
    """
    scored = [
        (row, float(np.dot(matrix[row], q))) for row in range(matrix.shape[0])
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
