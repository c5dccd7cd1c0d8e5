"""Vector math primitives shared by every index backend.

All operations are pure functions on 1-D numpy arrays. Inputs may be any
real dtype; arithmetic is carried out in float64 so that long dot products
(1024-dim and up) do not lose precision to 32-bit accumulation.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import DimMismatch, ZeroVector

# Norms below this are treated as degenerate (no recoverable direction).
ZERO_NORM_EPS = 1e-12


def as_vector(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Coerce input to a 1-D float64 array, rejecting NaN/Inf entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimMismatch(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ZeroVector("vector contains NaN or Inf")
    return v


def normalize(e: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return e scaled to unit Euclidean norm.

    Raises:
        ZeroVector: if ||e|| < 1e-12 (degenerate embedding row).
    """
    v = as_vector(e)
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM_EPS:
        raise ZeroVector(f"cannot normalize vector with norm {norm!r}")
    return v / norm


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Normalize every row of a 2-D array to unit norm (float64 output).

    Raises:
        ZeroVector: if any row has norm < 1e-12.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    norms = np.linalg.norm(m, axis=1)
    if not np.all(np.isfinite(m)):
        raise ZeroVector("matrix contains NaN or Inf")
    if np.any(norms < ZERO_NORM_EPS):
        bad = int(np.argmin(norms))
        raise ZeroVector(f"row {bad} has norm {norms[bad]!r}")
    return m / norms[:, None]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product of two unit vectors, clamped to [-1, 1].

    Raises:
        DimMismatch: if the operands have different lengths.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"dims differ: {a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def batch_cosine(matrix: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Similarities of every row of `matrix` against unit query `q`, clamped."""
    if matrix.shape[1] != q.shape[0]:
        raise DimMismatch(f"dims differ: {matrix.shape[1]} vs {q.shape[0]}")
    return np.clip(matrix @ q, -1.0, 1.0)


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine distance 1 - similarity, in [0, 2]."""
    return 1.0 - cosine_similarity(a, b)


def adapt_dimension(e: np.ndarray, target_dim: int) -> np.ndarray:
    """Truncate or zero-pad a vector to `target_dim` coordinates.

    Truncation keeps the first `target_dim` coordinates; padding appends
    zeros. The result is not renormalized here; callers that need a unit
    vector renormalize after adapting (see adapt_rows).

    Raises:
        ZeroVector: if the truncated prefix has norm < 1e-12.
        DimMismatch: if target_dim is not positive.
    """
    v = as_vector(e)
    if target_dim <= 0:
        raise DimMismatch(f"target_dim must be positive, got {target_dim}")
    if target_dim == v.shape[0]:
        return v.copy()
    if target_dim < v.shape[0]:
        out = v[:target_dim].copy()
        if float(np.linalg.norm(out)) < ZERO_NORM_EPS:
            raise ZeroVector(f"first {target_dim} coordinates are all (near) zero")
        return out
    out = np.zeros(target_dim, dtype=np.float64)
    out[: v.shape[0]] = v
    return out


def adapt_rows(matrix: np.ndarray, target_dim: int) -> np.ndarray:
    """Row-wise `adapt_dimension` followed by renormalization.

    This is the index-dimension adaptation used when tuning: every corpus
    and query vector is truncated/padded to the index dimension and brought
    back to unit norm so cosine scores stay comparable.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if target_dim <= 0:
        raise DimMismatch(f"target_dim must be positive, got {target_dim}")
    dim = m.shape[1]
    if target_dim <= dim:
        out = m[:, :target_dim].copy()
    else:
        out = np.zeros((m.shape[0], target_dim), dtype=np.float64)
        out[:, :dim] = m
    return normalize_rows(out)
