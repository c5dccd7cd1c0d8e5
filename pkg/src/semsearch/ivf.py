"""Inverted-file index: k-means cells probed nearest-first at query time.

A seeded k-means over the corpus produces `nlist` unit centroids; every
indexed vector lives in exactly one cell (its nearest centroid at insert
time). A query scores only the vectors in its `nprobe` nearest cells,
with the same exact ranking rule as the flat index.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    DimMismatch,
    DuplicateId,
    IndexFrozen,
    IndexNotFrozen,
    InvalidParam,
    NotTrained,
    TooFewVectors,
)
from .hits import SearchHit, rank_candidates
from .vectors import as_vector, normalize_rows

KMEANS_MAX_ITERS = 25
KMEANS_SHIFT_TOL = 1e-4


def default_nlist(n: int) -> int:
    """Heuristic cell count: ceil(sqrt(N)), at least 1."""
    return max(1, math.ceil(math.sqrt(n)))


def train(vectors: np.ndarray, nlist: int, seed: int) -> np.ndarray:
    """Seeded k-means returning `nlist` unit-norm centroids.

    Initialization is k-means++ style; iteration stops after 25 rounds or
    when the largest centroid shift drops below 1e-4. Deterministic for a
    fixed seed and input order.

    Raises:
        TooFewVectors: fewer vectors than requested cells.
        InvalidParam: nlist < 1.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise DimMismatch(f"expected (n, dim) training matrix, got shape {x.shape}")
    n = x.shape[0]
    if nlist < 1:
        raise InvalidParam(f"nlist must be >= 1, got {nlist}")
    if n < nlist:
        raise TooFewVectors(f"{n} vectors < nlist {nlist}")

    rng = np.random.default_rng(seed)

    # k-means++ seeding: first centroid uniform, then proportional to
    # squared distance from the nearest chosen centroid.
    centroids = np.empty((nlist, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = x[first]
    if nlist > 1:
        d2 = np.sum((x - centroids[0]) ** 2, axis=1)
        for j in range(1, nlist):
            total = float(d2.sum())
            if total <= 0.0:
                # all remaining points coincide with a centroid
                pick = int(rng.integers(n))
            else:
                pick = int(rng.choice(n, p=d2 / total))
            centroids[j] = x[pick]
            d2 = np.minimum(d2, np.sum((x - centroids[j]) ** 2, axis=1))

    for _ in range(KMEANS_MAX_ITERS):
        assign = np.argmax(x @ centroids.T, axis=1)
        new = np.empty_like(centroids)
        for j in range(nlist):
            members = x[assign == j]
            if members.shape[0] == 0:
                # re-seed a dead cell from the point farthest from its centroid
                far = int(np.argmin(np.max(x @ centroids.T, axis=1)))
                new[j] = x[far]
            else:
                new[j] = members.mean(axis=0)
        new = normalize_rows(new)
        shift = float(np.max(np.linalg.norm(new - centroids, axis=1)))
        centroids = new
        if shift < KMEANS_SHIFT_TOL:
            break
    return centroids


class IvfIndex:
    """Coarse-quantized cosine index with per-cell inverted lists."""

    index_type = "ivf"

    def __init__(self, dim: int, nlist: int):
        if dim <= 0:
            raise DimMismatch(f"dim must be positive, got {dim}")
        if nlist < 1:
            raise InvalidParam(f"nlist must be >= 1, got {nlist}")
        self.dim = dim
        self.nlist = nlist
        self.trained = False
        self.frozen = False
        self.centroids: np.ndarray | None = None
        # parallel per-entry storage, in insertion order
        self._ids: list[str | int] = []
        self._id_set: set = set()
        self._cells: list[int] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._cell_members: list[np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str | int]:
        return list(self._ids)

    def train(self, vectors: np.ndarray, seed: int = 42) -> None:
        """Fit the coarse quantizer on `vectors` (rows are unit vectors)."""
        if self.frozen:
            raise IndexFrozen("cannot train a frozen index")
        cents = train(vectors, self.nlist, seed)
        if cents.shape[1] != self.dim:
            raise DimMismatch(f"training dim {cents.shape[1]} != index dim {self.dim}")
        self.centroids = cents
        self.trained = True

    def set_centroids(self, centroids: np.ndarray) -> None:
        """Install externally trained centroids (snapshot restore path)."""
        c = np.asarray(centroids, dtype=np.float64)
        if c.shape != (self.nlist, self.dim):
            raise DimMismatch(f"centroid shape {c.shape} != ({self.nlist}, {self.dim})")
        self.centroids = c
        self.trained = True

    def add(self, doc_id: str | int, e: np.ndarray) -> None:
        """Append one unit vector to the cell of its nearest centroid."""
        if not self.trained or self.centroids is None:
            raise NotTrained("train the quantizer before adding vectors")
        if self.frozen:
            raise IndexFrozen("cannot add to a frozen index")
        v = as_vector(e)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"vector dim {v.shape[0]} != index dim {self.dim}")
        if doc_id in self._id_set:
            raise DuplicateId(f"id {doc_id!r} already indexed")
        cell = int(np.argmax(self.centroids @ v))
        self._ids.append(doc_id)
        self._id_set.add(doc_id)
        self._cells.append(cell)
        self._rows.append(v)

    def freeze(self) -> None:
        if self.frozen:
            return
        if not self.trained:
            raise NotTrained("train before freezing")
        if self._rows:
            self._matrix = np.vstack(self._rows)
        else:
            self._matrix = np.empty((0, self.dim), dtype=np.float64)
        self._rows = []
        cells = np.asarray(self._cells, dtype=np.int64)
        self._cell_members = [
            np.flatnonzero(cells == j) for j in range(self.nlist)
        ]
        self.frozen = True

    def cell_sizes(self) -> list[int]:
        if self._cell_members is None:
            cells = np.asarray(self._cells, dtype=np.int64)
            return [int(np.sum(cells == j)) for j in range(self.nlist)]
        return [int(m.size) for m in self._cell_members]

    def cell_of(self, position: int) -> int:
        """Cell assignment of the vector at insertion position `position`."""
        return self._cells[position]

    def vector(self, row: int) -> np.ndarray:
        if not self.frozen or self._matrix is None:
            raise IndexNotFrozen("freeze the index before reading rows")
        return self._matrix[row]

    def search(self, q: np.ndarray, k: int, nprobe: int) -> list[SearchHit]:
        """Exact top-k over the union of the `nprobe` nearest cells.

        With nprobe == nlist this degenerates to the flat index's exact
        search. If the probed cells hold fewer than k vectors, only those
        are returned (no fallback widening).
        """
        if not self.trained or self.centroids is None:
            raise NotTrained("train the quantizer before searching")
        if not self.frozen or self._matrix is None or self._cell_members is None:
            raise IndexNotFrozen("freeze the index before searching")
        if not 1 <= nprobe <= self.nlist:
            raise InvalidParam(f"nprobe must be in [1, {self.nlist}], got {nprobe}")
        if k < 1:
            raise InvalidParam(f"k must be >= 1, got {k}")
        v = as_vector(q)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"query dim {v.shape[0]} != index dim {self.dim}")
        if len(self._ids) == 0:
            return []

        cell_scores = self.centroids @ v
        probe = np.argsort(-cell_scores, kind="stable")[:nprobe]
        member_lists = [self._cell_members[int(j)] for j in probe]
        candidates = np.concatenate(member_lists) if member_lists else np.empty(0, dtype=np.int64)
        if candidates.size == 0:
            return []
        # sort so that candidate order (and thus tie-breaking) matches the
        # global insertion sequence regardless of probe order
        candidates = np.sort(candidates)
        scores = np.clip(self._matrix[candidates] @ v, -1.0, 1.0)
        ids = [self._ids[int(i)] for i in candidates]
        return rank_candidates(scores, candidates, ids, k)
