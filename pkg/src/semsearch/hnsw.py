"""Hierarchical navigable small-world graph index.

Layered proximity graph over unit vectors: nodes are assigned a maximum
layer by a geometric draw (multiplier 1/ln(M)); queries descend greedily
from the top layer and run a best-first expansion with a dynamic
candidate list of width ef at layer 0. Neighbor lists are degree-bounded
(M per layer, 2M at layer 0). Selection and pruning use diversity-aware
filtering (a candidate survives only if it is closer to the base point
than to any already-kept neighbor, nearest rejected backfilled): plain
keep-closest pruning severs the long-range edges between clusters and
leaves layer 0 disconnected on clustered corpora.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .errors import (
    CapacityExceeded,
    DimMismatch,
    DuplicateId,
    IndexFrozen,
    IndexNotFrozen,
    InvalidParam,
)
from .flat import check_normalized
from .hits import SearchHit, rank_candidates
from .vectors import as_vector


class HnswIndex:
    """Graph index built by sequential insertion, searched after freeze().

    Fully deterministic: (seed, insertion order, query) fixes the level
    sequence, the graph, and every search result. Node positions are
    insertion sequence numbers 0..n-1 and double as tie-break keys.
    """

    index_type = "hnsw"

    def __init__(
        self,
        capacity: int,
        dim: int,
        m: int = 16,
        ef_construction: int = 200,
        seed: int = 42,
    ):
        if m < 2:
            raise InvalidParam(f"m must be >= 2, got {m}")
        if capacity < 1 or dim < 1 or ef_construction < 1:
            raise InvalidParam(
                f"capacity, dim, ef_construction must be positive, got "
                f"{capacity}, {dim}, {ef_construction}"
            )
        self.capacity = capacity
        self.dim = dim
        self.m = m
        self.ef_construction = ef_construction
        self.seed = seed
        self.frozen = False

        self._level_mult = 1.0 / math.log(m)
        self._rng = np.random.default_rng(seed)
        self._n = 0
        self._ids: list[str | int] = []
        self._id_set: set = set()
        self._vectors = np.zeros((capacity, dim), dtype=np.float64)
        self._levels = np.zeros(capacity, dtype=np.int32)
        # per layer: fixed-width neighbor matrix and per-node degree
        self._adj: list[np.ndarray] = []
        self._deg: list[np.ndarray] = []
        self._entry = -1
        self._max_level = -1

    def __len__(self) -> int:
        return self._n

    @property
    def ids(self) -> list[str | int]:
        return list(self._ids)

    @property
    def entry_point(self) -> int:
        """Node position of the current top-layer entry point (-1 if empty)."""
        return self._entry

    @property
    def max_level(self) -> int:
        return self._max_level

    def level_of(self, pos: int) -> int:
        return int(self._levels[pos])

    def neighbors(self, pos: int, layer: int) -> list[int]:
        """Neighbor node positions of `pos` at `layer`."""
        if layer >= len(self._adj):
            return []
        d = int(self._deg[layer][pos])
        return self._adj[layer][pos, :d].tolist()

    def degree_bound(self, layer: int) -> int:
        return 2 * self.m if layer == 0 else self.m

    def vector(self, pos: int) -> np.ndarray:
        return self._vectors[pos]

    def _draw_level(self) -> int:
        u = float(self._rng.uniform(0.0, 1.0))
        if u <= 0.0:
            u = np.finfo(np.float64).tiny
        return int(-math.log(u) * self._level_mult)

    def _ensure_layers(self, level: int) -> None:
        while len(self._adj) <= level:
            layer = len(self._adj)
            bound = self.degree_bound(layer)
            self._adj.append(np.full((self.capacity, bound), -1, dtype=np.int32))
            self._deg.append(np.zeros(self.capacity, dtype=np.int32))

    def _dists(self, nodes: np.ndarray, q: np.ndarray) -> np.ndarray:
        return 1.0 - self._vectors[nodes] @ q

    def _search_layer(
        self,
        q: np.ndarray,
        entry: list[tuple[float, int]],
        layer: int,
        ef: int,
    ) -> list[tuple[float, int]]:
        """Best-first expansion at one layer.

        `entry` holds (distance, node) seeds. Returns up to ef (distance,
        node) pairs sorted ascending by (distance, node). Ties in the heaps
        resolve by node position, keeping the whole walk deterministic.
        """
        adj = self._adj[layer]
        deg = self._deg[layer]
        vectors = self._vectors
        visited = np.zeros(self._n, dtype=bool)

        cand: list[tuple[float, int]] = []
        best: list[tuple[float, int]] = []
        for d, e in entry:
            if not visited[e]:
                visited[e] = True
                cand.append((d, e))
                best.append((-d, -e))
        heapq.heapify(cand)
        heapq.heapify(best)

        while cand:
            d, node = heapq.heappop(cand)
            if len(best) >= ef and d > -best[0][0]:
                break
            nbrs = adj[node, : deg[node]]
            if nbrs.size == 0:
                continue
            fresh = nbrs[~visited[nbrs]]
            if fresh.size == 0:
                continue
            visited[fresh] = True
            nd = 1.0 - vectors[fresh] @ q
            for dd, e in zip(nd.tolist(), fresh.tolist()):
                if len(best) < ef:
                    heapq.heappush(cand, (dd, e))
                    heapq.heappush(best, (-dd, -e))
                elif dd < -best[0][0]:
                    heapq.heappush(cand, (dd, e))
                    heapq.heappush(best, (-dd, -e))
                    heapq.heappop(best)

        return sorted((-nd, -ne) for nd, ne in best)

    def _select_diverse(
        self, cands: list[tuple[float, int]], bound: int
    ) -> list[int]:
        """Pick up to `bound` neighbors from (distance, node) candidates.

        Candidates must be sorted ascending by (distance, node). A candidate
        is kept only if it is strictly closer to the base point than to every
        already-kept neighbor; nearest rejected candidates backfill the
        remaining slots. Deterministic for a fixed candidate order.
        """
        if len(cands) <= bound:
            return [n for _, n in cands]
        nodes = [n for _, n in cands]
        vecs = self._vectors[nodes]
        # min distance from each candidate to the kept set, updated as the
        # kept set grows; one row of the pairwise matrix per kept neighbor
        min_to_kept = np.full(len(cands), np.inf)
        kept: list[int] = []
        rejected: list[int] = []
        for col, (d, node) in enumerate(cands):
            if len(kept) >= bound:
                break
            if min_to_kept[col] <= d:
                rejected.append(node)
                continue
            kept.append(node)
            np.minimum(min_to_kept, 1.0 - vecs @ vecs[col], out=min_to_kept)
        for node in rejected:
            if len(kept) >= bound:
                break
            kept.append(node)
        return kept

    def _link(self, layer: int, a: int, b: int) -> None:
        """Append edge a->b, re-selecting a's list if over the degree bound."""
        adj = self._adj[layer]
        deg = self._deg[layer]
        bound = self.degree_bound(layer)
        d = int(deg[a])
        if d < bound:
            adj[a, d] = b
            deg[a] = d + 1
            return
        merged = np.empty(d + 1, dtype=np.int32)
        merged[:d] = adj[a, :d]
        merged[d] = b
        dist = 1.0 - self._vectors[merged] @ self._vectors[a]
        order = np.lexsort((merged, dist))
        cands = [(float(dist[i]), int(merged[i])) for i in order]
        kept = self._select_diverse(cands, bound)
        adj[a, : len(kept)] = kept
        deg[a] = len(kept)

    def _insert(self, doc_id: str | int, e: np.ndarray) -> None:
        if self.frozen:
            raise IndexFrozen("cannot add to a frozen index")
        if self._n >= self.capacity:
            raise CapacityExceeded(f"capacity {self.capacity} reached")
        v = as_vector(e)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"vector dim {v.shape[0]} != index dim {self.dim}")
        check_normalized(v)
        if doc_id in self._id_set:
            raise DuplicateId(f"id {doc_id!r} already indexed")

        pos = self._n
        level = self._draw_level()
        self._vectors[pos] = v
        self._levels[pos] = level
        self._ids.append(doc_id)
        self._id_set.add(doc_id)
        self._ensure_layers(level)
        self._n += 1

        if pos == 0:
            self._entry = pos
            self._max_level = level
            return

        d_entry = float(1.0 - np.dot(self._vectors[self._entry], v))
        ep = [(d_entry, self._entry)]
        for layer in range(self._max_level, level, -1):
            ep = self._search_layer(v, ep, layer, 1)

        for layer in range(min(level, self._max_level), -1, -1):
            cands = self._search_layer(v, ep, layer, self.ef_construction)
            # link up to the layer's full degree bound (2M at layer 0): the
            # denser base layer buys a large recall gain at fixed ef_search
            for nb in self._select_diverse(cands, self.degree_bound(layer)):
                self._link(layer, pos, nb)
                self._link(layer, nb, pos)
            ep = cands

        if level > self._max_level:
            self._entry = pos
            self._max_level = level

    def add_items(self, pairs) -> None:
        """Insert (doc_id, vector) pairs in order.

        Raises:
            CapacityExceeded, DimMismatch, DuplicateId, IndexFrozen.
        """
        for doc_id, e in pairs:
            self._insert(doc_id, e)

    def freeze(self) -> None:
        self.frozen = True

    def search(self, q: np.ndarray, k: int, ef_search: int) -> list[SearchHit]:
        """Top-k by cosine score with search breadth ef_search (>= k).

        An empty index returns an empty list. Ordering and tie rules match
        the flat index.
        """
        if not self.frozen:
            raise IndexNotFrozen("freeze the index before searching")
        if k < 1:
            raise InvalidParam(f"k must be >= 1, got {k}")
        if ef_search < k:
            raise InvalidParam(f"ef_search {ef_search} < k {k}")
        if self._n == 0:
            return []
        v = as_vector(q)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"query dim {v.shape[0]} != index dim {self.dim}")

        d_entry = float(1.0 - np.dot(self._vectors[self._entry], v))
        ep = [(d_entry, self._entry)]
        for layer in range(self._max_level, 0, -1):
            ep = self._search_layer(v, ep, layer, 1)
        cands = self._search_layer(v, ep, 0, ef_search)

        nodes = np.asarray([n for _, n in cands], dtype=np.int64)
        scores = np.clip(1.0 - np.asarray([d for d, _ in cands]), -1.0, 1.0)
        ids = [self._ids[int(n)] for n in nodes]
        return rank_candidates(scores, nodes, ids, k)
