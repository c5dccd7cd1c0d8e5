"""Query orchestration over the index backends.

The engine owns one corpus (doc ids, unit vectors, optional document
records) and any subset of the three index backends built over it. After
freeze() it is immutable and all search entry points are thread-safe.

Multi-vector queries run one search per query vector, merge by doc id
keeping each id's maximum score, apply the similarity threshold, and
re-rank. The hybrid backend unions candidates from a coarse stage (IVF,
or flat when no IVF is built) and the graph index, then re-scores the
union exactly against the stored vectors.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BackendMissing,
    DimMismatch,
    EmptyQuery,
    IndexNotFrozen,
    InvalidParam,
    SemsearchError,
    TooFewVectors,
)
from .flat import FlatIndex
from .hits import SearchHit, rank_candidates
from .hnsw import HnswIndex
from .ivf import IvfIndex, default_nlist
from .vectors import as_vector

DEFAULT_NPROBE = 10
DEFAULT_EF_SEARCH = 100
# hybrid stage 1 gathers c*k candidates from each backend
HYBRID_CANDIDATE_FACTOR = 4

BACKENDS = ("flat", "ivf", "hnsw", "hybrid")


@dataclass
class QuerySpec:
    """One (possibly multi-vector) query against a frozen engine."""

    vectors: list[np.ndarray]
    k: int = 10
    threshold: float = -1.0
    backend: str = "flat"
    nprobe: int | None = None
    ef_search: int | None = None

    def __post_init__(self):
        if not -1.0 <= self.threshold <= 1.0:
            raise InvalidParam(f"threshold must be in [-1, 1], got {self.threshold}")
        if self.k < 1:
            raise InvalidParam(f"k must be >= 1, got {self.k}")
        if self.backend not in BACKENDS:
            raise InvalidParam(f"backend must be one of {BACKENDS}, got {self.backend!r}")


@dataclass
class ResultSet:
    """Deduplicated, threshold-filtered hits plus the measured search time.

    `query_time` covers index search and merge only (no embedding, no I/O).
    `records` parallels `hits` when the engine holds document records.
    `error` is set (and hits empty) when a batched query failed.
    """

    hits: list[SearchHit] = field(default_factory=list)
    query_time: float = 0.0
    records: list | None = None
    error: str | None = None


class SearchEngine:
    """Corpus container plus backend dispatch. Build, freeze, then search."""

    def __init__(self, dim: int):
        if dim <= 0:
            raise DimMismatch(f"dim must be positive, got {dim}")
        self.dim = dim
        self.frozen = False
        self._ids: list[str | int] = []
        self._pos: dict = {}
        self._rows: list[np.ndarray] = []
        self._records: dict = {}
        self._matrix: np.ndarray | None = None
        self.flat: FlatIndex | None = None
        self.ivf: IvfIndex | None = None
        self.hnsw: HnswIndex | None = None

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str | int]:
        return list(self._ids)

    def add_document(self, doc_id: str | int, vector: np.ndarray, record=None) -> None:
        """Register one unit vector (and optional record) before building."""
        if self.frozen:
            raise IndexNotFrozen("engine already frozen")
        v = as_vector(vector)
        if v.shape[0] != self.dim:
            raise DimMismatch(f"vector dim {v.shape[0]} != engine dim {self.dim}")
        if doc_id in self._pos:
            raise InvalidParam(f"doc id {doc_id!r} already added")
        self._pos[doc_id] = len(self._ids)
        self._ids.append(doc_id)
        self._rows.append(v)
        if record is not None:
            self._records[doc_id] = record

    def build_flat(self) -> None:
        index = FlatIndex(dim=self.dim)
        for doc_id, v in zip(self._ids, self._rows):
            index.add(doc_id, v)
        index.freeze()
        self.flat = index

    def build_ivf(self, nlist: int | None = None, seed: int = 42) -> None:
        if not self._rows:
            raise TooFewVectors("no documents to index")
        nlist = nlist if nlist is not None else default_nlist(len(self._rows))
        index = IvfIndex(dim=self.dim, nlist=nlist)
        index.train(np.vstack(self._rows), seed=seed)
        for doc_id, v in zip(self._ids, self._rows):
            index.add(doc_id, v)
        index.freeze()
        self.ivf = index

    def build_hnsw(
        self, m: int = 16, ef_construction: int = 200, seed: int = 42
    ) -> None:
        index = HnswIndex(
            capacity=max(1, len(self._rows)),
            dim=self.dim,
            m=m,
            ef_construction=ef_construction,
            seed=seed,
        )
        index.add_items(zip(self._ids, self._rows))
        index.freeze()
        self.hnsw = index

    def freeze(self) -> None:
        if self.frozen:
            return
        if self._rows:
            self._matrix = np.vstack(self._rows)
        else:
            self._matrix = np.empty((0, self.dim), dtype=np.float64)
        self.frozen = True

    def vector_of(self, doc_id: str | int) -> np.ndarray:
        if self._matrix is None:
            raise IndexNotFrozen("freeze the engine first")
        return self._matrix[self._pos[doc_id]]

    def record_of(self, doc_id: str | int):
        return self._records.get(doc_id)

    def _require_frozen(self) -> None:
        if not self.frozen:
            raise IndexNotFrozen("freeze the engine before searching")

    def single_vector_search(
        self,
        q: np.ndarray,
        k: int,
        backend: str = "flat",
        nprobe: int | None = None,
        ef_search: int | None = None,
    ) -> list[SearchHit]:
        """Raw top-k from one backend; no threshold applied.

        IVF defaults to nprobe=10 capped at nlist; HNSW defaults to
        ef_search=max(k, 100). Explicit out-of-range values raise.
        """
        self._require_frozen()
        v = as_vector(q)
        if backend == "flat":
            if self.flat is None:
                raise BackendMissing("flat index not built")
            return self.flat.search(v, k)
        if backend == "ivf":
            if self.ivf is None:
                raise BackendMissing("ivf index not built")
            if nprobe is None:
                nprobe = min(DEFAULT_NPROBE, self.ivf.nlist)
            return self.ivf.search(v, k, nprobe=nprobe)
        if backend == "hnsw":
            if self.hnsw is None:
                raise BackendMissing("hnsw index not built")
            if ef_search is None:
                ef_search = max(k, DEFAULT_EF_SEARCH)
            return self.hnsw.search(v, k, ef_search=ef_search)
        if backend == "hybrid":
            return self._hybrid_one(v, k, nprobe=nprobe, ef_search=ef_search)
        raise InvalidParam(f"unknown backend {backend!r}")

    def _hybrid_one(
        self,
        q: np.ndarray,
        k: int,
        nprobe: int | None = None,
        ef_search: int | None = None,
    ) -> list[SearchHit]:
        """Candidate union from coarse + graph stages, exact re-rank."""
        if self.hnsw is None:
            raise BackendMissing("hybrid search requires an hnsw index")
        coarse: FlatIndex | IvfIndex | None = self.ivf if self.ivf is not None else self.flat
        if coarse is None:
            raise BackendMissing("hybrid search requires an ivf or flat index")
        assert self._matrix is not None
        ck = HYBRID_CANDIDATE_FACTOR * k
        if isinstance(coarse, IvfIndex):
            if nprobe is None:
                nprobe = min(DEFAULT_NPROBE, coarse.nlist)
            stage1 = coarse.search(q, ck, nprobe=nprobe)
        else:
            stage1 = coarse.search(q, ck)
        ef = max(ck, ef_search if ef_search is not None else DEFAULT_EF_SEARCH)
        stage2 = self.hnsw.search(q, ck, ef_search=ef)
        cand_ids = {h.doc_id for h in stage1} | {h.doc_id for h in stage2}
        if not cand_ids:
            return []
        positions = np.asarray(sorted(self._pos[i] for i in cand_ids), dtype=np.int64)
        scores = np.clip(self._matrix[positions] @ q, -1.0, 1.0)
        ids = [self._ids[int(p)] for p in positions]
        return rank_candidates(scores, positions, ids, k)

    def merged_hits(self, spec: QuerySpec) -> list[SearchHit]:
        """Deduplicated union of the per-vector top-k hit sets.

        Runs one backend search per query vector at spec.k, keeps each doc
        id's maximum score, filters to score >= threshold, and sorts by
        descending score then ascending doc id. Not truncated: this is the
        raw multi-vector union before the final cut to spec.k.
        """
        self._require_frozen()
        if not spec.vectors:
            raise EmptyQuery("query has no vectors")
        best: dict = {}
        for q in spec.vectors:
            hits = self.single_vector_search(
                q,
                spec.k,
                backend=spec.backend,
                nprobe=spec.nprobe,
                ef_search=spec.ef_search,
            )
            for h in hits:
                prev = best.get(h.doc_id)
                if prev is None or h.score > prev:
                    best[h.doc_id] = h.score
        kept = [(i, s) for i, s in best.items() if s >= spec.threshold]
        kept.sort(key=lambda t: (-t[1], t[0]))
        return [SearchHit(doc_id=i, score=s, rank=r) for r, (i, s) in enumerate(kept)]

    def multi_vector_search(self, spec: QuerySpec) -> ResultSet:
        """merged_hits truncated to spec.k, with the merge time measured."""
        t0 = time.perf_counter()
        merged = self.merged_hits(spec)
        hits = merged[: spec.k]
        elapsed = time.perf_counter() - t0
        return ResultSet(hits=hits, query_time=elapsed)

    def hybrid_search(self, spec: QuerySpec) -> ResultSet:
        """Multi-vector search forced through the hybrid backend."""
        forced = QuerySpec(
            vectors=spec.vectors,
            k=spec.k,
            threshold=spec.threshold,
            backend="hybrid",
            nprobe=spec.nprobe,
            ef_search=spec.ef_search,
        )
        return self.multi_vector_search(forced)

    def retrieve(self, specs: list[QuerySpec], workers: int = 1) -> list[ResultSet]:
        """Run a query batch, preserving input order.

        Per-query failures are recorded on the ResultSet (error field) and
        do not abort the batch. Document records, when present, are joined
        onto each ResultSet.
        """
        self._require_frozen()

        def run(spec: QuerySpec) -> ResultSet:
            try:
                rs = self.multi_vector_search(spec)
            except SemsearchError as exc:
                return ResultSet(hits=[], query_time=0.0, error=f"{type(exc).__name__}: {exc}")
            if self._records:
                rs.records = [self._records.get(h.doc_id) for h in rs.hits]
            return rs

        if workers > 1 and len(specs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(run, specs))
        return [run(spec) for spec in specs]
