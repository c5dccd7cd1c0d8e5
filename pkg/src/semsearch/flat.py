"""Exact brute-force index: full scan over the stored matrix.

Serves both as a production backend for small corpora and as the
ground-truth oracle the approximate indexes are measured against.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, DuplicateId, IndexFrozen, IndexNotFrozen, InvalidParam
from .hits import SearchHit, rank_candidates
from .vectors import as_vector

# Stored rows must be unit vectors within this tolerance.
NORM_TOL = 1e-6


def check_normalized(v: np.ndarray) -> None:
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidParam(f"vector is not unit-norm (norm={norm!r}); normalize first")


class FlatIndex:
    """Append-only exact cosine index over unit vectors.

    Build single-writer, then `freeze()`; a frozen index is immutable and
    safe to search from any number of threads.
    """

    index_type = "flat"

    def __init__(self, dim: int):
        if dim <= 0:
            raise DimMismatch(f"dim must be positive, got {dim}")
        self.dim = dim
        self.frozen = False
        self._ids: list[str | int] = []
        self._id_set: set = set()
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str | int]:
        return list(self._ids)

    def add(self, doc_id: str | int, e: np.ndarray) -> None:
        """Append one unit vector under `doc_id`.

        Raises:
            IndexFrozen: after freeze().
            DimMismatch: wrong dimension or non-unit norm.
            DuplicateId: id already present.
        """
        if self.frozen:
            raise IndexFrozen("cannot add to a frozen index")
        v = as_vector(e)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"vector dim {v.shape[0]} != index dim {self.dim}")
        check_normalized(v)
        if doc_id in self._id_set:
            raise DuplicateId(f"id {doc_id!r} already indexed")
        self._ids.append(doc_id)
        self._id_set.add(doc_id)
        self._rows.append(v)

    def freeze(self) -> None:
        """Seal the index; stacks rows into one contiguous matrix."""
        if self.frozen:
            return
        if self._rows:
            self._matrix = np.vstack(self._rows)
        else:
            self._matrix = np.empty((0, self.dim), dtype=np.float64)
        self._rows = []
        self.frozen = True

    def vector(self, row: int) -> np.ndarray:
        """Stored vector at insertion position `row` (frozen index only)."""
        if not self.frozen or self._matrix is None:
            raise IndexNotFrozen("freeze the index before reading rows")
        return self._matrix[row]

    def search(self, q: np.ndarray, k: int) -> list[SearchHit]:
        """Exact top-k by cosine score.

        Ties break by ascending insertion order. An empty index returns an
        empty list. Returns min(k, size) hits.
        """
        if not self.frozen or self._matrix is None:
            raise IndexNotFrozen("freeze the index before searching")
        if k < 1:
            raise DimMismatch(f"k must be >= 1, got {k}")
        v = as_vector(q)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"query dim {v.shape[0]} != index dim {self.dim}")
        n = len(self._ids)
        if n == 0:
            return []
        scores = np.clip(self._matrix @ v, -1.0, 1.0)
        seqs = np.arange(n)
        return rank_candidates(scores, seqs, self._ids, k)
