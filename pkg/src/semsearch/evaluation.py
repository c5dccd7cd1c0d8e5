"""Retrieval metrics and the hyperparameter grid tuner.

Metrics follow the usual set definitions: precision and recall against a
relevance judgment, recall@k as overlap with the exact flat-index oracle,
and order statistics over measured per-query times. The tuner sweeps the
Cartesian grid (dims x thresholds x models x index types, each in
ascending/lexicographic order), evaluates one trial per cell, and returns
the argmax under the chosen objective, ties broken by enumeration order.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .engine import QuerySpec, SearchEngine
from .errors import (
    EmptyResults,
    InvalidParam,
    KMismatch,
    MissingJudgment,
    SemsearchError,
)
from .hits import SearchHit
from .storage import Corpus
from .vectors import adapt_rows

MAX_PRECISION = "max_precision"
PRECISION_PER_TIME = "precision_per_time"
OBJECTIVES = (MAX_PRECISION, PRECISION_PER_TIME)

# floor for the precision/time ratio so near-zero timings cannot blow up
TIME_FLOOR_S = 1e-6

TRIAL_COLUMNS = (
    "model",
    "index_type",
    "dim",
    "threshold",
    "precision",
    "recall",
    "f1",
    "mean_query_time_s",
)


class RelevanceJudgment:
    """Ground truth for precision/recall.

    Two rules: same-label (a document is relevant to a query document iff
    their topic labels match, the query document itself excluded) and
    explicit sets (query id -> relevant doc ids).
    """

    def __init__(self, explicit: Mapping | None = None, labels: Mapping | None = None):
        if (explicit is None) == (labels is None):
            raise InvalidParam("provide exactly one of explicit/labels")
        self._explicit = dict(explicit) if explicit is not None else None
        self._labels = dict(labels) if labels is not None else None
        self._by_label: dict | None = None
        if self._labels is not None:
            self._by_label = {}
            for doc_id, label in self._labels.items():
                self._by_label.setdefault(label, set()).add(doc_id)

    @classmethod
    def same_label(cls, labels: Mapping) -> "RelevanceJudgment":
        return cls(labels=labels)

    @classmethod
    def explicit(cls, mapping: Mapping) -> "RelevanceJudgment":
        return cls(explicit=mapping)

    def relevant_for(self, query_id) -> set:
        if self._explicit is not None:
            if query_id not in self._explicit:
                raise MissingJudgment(f"no judgment for query {query_id!r}")
            return set(self._explicit[query_id])
        assert self._labels is not None and self._by_label is not None
        if query_id not in self._labels:
            raise MissingJudgment(f"no label for query {query_id!r}")
        peers = self._by_label[self._labels[query_id]]
        return peers - {query_id}


def precision_recall(
    retrievals: Sequence[tuple[object, Sequence[SearchHit]]],
    judgments: RelevanceJudgment,
    k: int | None = None,
) -> tuple[float, float]:
    """Mean per-query precision and recall.

    `retrievals` pairs each query id with its hit list. Queries that
    retrieved nothing contribute precision 1.0 when nothing was relevant
    and 0.0 otherwise; queries with no relevant documents contribute
    recall 1.0 (vacuous).
    """
    if not retrievals:
        raise EmptyResults("no retrievals to score")
    precisions = []
    recalls = []
    for query_id, hits in retrievals:
        retrieved = {h.doc_id for h in (hits[:k] if k is not None else hits)}
        relevant = judgments.relevant_for(query_id)
        overlap = len(retrieved & relevant)
        if retrieved:
            precisions.append(overlap / len(retrieved))
        else:
            precisions.append(1.0 if not relevant else 0.0)
        recalls.append(overlap / len(relevant) if relevant else 1.0)
    return float(np.mean(precisions)), float(np.mean(recalls))


def recall_at_k(
    results: Sequence[Sequence[SearchHit]],
    oracle_results: Sequence[Sequence[SearchHit]],
    k: int,
    corpus_size: int | None = None,
) -> float:
    """Mean overlap of top-k ids with the exact oracle's top-k.

    Raises KMismatch when the oracle returned fewer than k hits although
    the corpus holds at least k documents.
    """
    if len(results) != len(oracle_results):
        raise KMismatch(f"{len(results)} result lists vs {len(oracle_results)} oracle lists")
    if not results:
        raise EmptyResults("no results to score")
    overlaps = []
    for hits, oracle in zip(results, oracle_results):
        oracle_ids = [h.doc_id for h in oracle[:k]]
        if len(oracle_ids) < k and (corpus_size is None or corpus_size >= k):
            raise KMismatch(f"oracle returned {len(oracle_ids)} hits for k={k}")
        denom = len(oracle_ids) if oracle_ids else 1
        got = {h.doc_id for h in hits[:k]}
        overlaps.append(len(got & set(oracle_ids)) / denom)
    return float(np.mean(overlaps))


@dataclass
class QueryTimeStats:
    mean: float
    p50: float
    p90: float
    p99: float
    cdf: list[tuple[float, float]]


def query_time_stats(times: Sequence[float]) -> QueryTimeStats:
    """Order statistics plus the empirical CDF of query times.

    The CDF holds one (time, fraction <= time) point per distinct
    observation; its last point always has fraction 1.0.
    """
    if len(times) == 0:
        raise EmptyResults("no query times")
    arr = np.sort(np.asarray(times, dtype=np.float64))
    n = arr.shape[0]
    cdf: list[tuple[float, float]] = []
    for i, t in enumerate(arr.tolist()):
        if i + 1 < n and arr[i + 1] == t:
            continue
        cdf.append((t, (i + 1) / n))
    p50, p90, p99 = (float(v) for v in np.percentile(arr, [50, 90, 99]))
    return QueryTimeStats(mean=float(arr.mean()), p50=p50, p90=p90, p99=p99, cdf=cdf)


@dataclass(frozen=True)
class GridCell:
    """One hyperparameter combination."""

    model: str
    dim: int
    threshold: float
    index_type: str


@dataclass
class ParameterGrid:
    """The swept hyperparameter space."""

    dims: Sequence[int]
    thresholds: Sequence[float]
    models: Sequence[str]
    index_types: Sequence[str]

    def cells(self) -> list[GridCell]:
        """Cartesian product in the documented order.

        dims x thresholds x models x index_types, dims/thresholds
        ascending, models/index_types lexicographic.
        """
        return [
            GridCell(model=m, dim=d, threshold=t, index_type=it)
            for d in sorted(self.dims)
            for t in sorted(self.thresholds)
            for m in sorted(self.models)
            for it in sorted(self.index_types)
        ]


@dataclass
class TrialResult:
    """Measured outcome of one grid cell."""

    model: str
    index_type: str
    dim: int
    threshold: float
    precision: float
    recall: float
    f1: float
    mean_query_time_s: float
    failed: bool = False
    error: str | None = None


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class IndexBuildParams:
    """Backend parameters used when the tuner builds a cell's index.

    nprobe=None defers to the engine default (10, capped at nlist).
    """

    m: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    nlist: int | None = None
    nprobe: int | None = None


def build_cell_engine(
    corpus: Corpus,
    dim: int,
    index_type: str,
    seed: int = 42,
    params: IndexBuildParams | None = None,
) -> SearchEngine:
    """Adapt the corpus to `dim`, build the requested backend, freeze."""
    params = params or IndexBuildParams()
    vectors = adapt_rows(corpus.vectors, dim)
    engine = SearchEngine(dim=dim)
    for rec, v in zip(corpus.records, vectors):
        engine.add_document(rec.id, v, record=rec)
    if index_type == "flat":
        engine.build_flat()
    elif index_type == "ivf":
        engine.build_ivf(nlist=params.nlist, seed=seed)
    elif index_type == "hnsw":
        engine.build_hnsw(m=params.m, ef_construction=params.ef_construction, seed=seed)
    elif index_type == "hybrid":
        engine.build_ivf(nlist=params.nlist, seed=seed)
        engine.build_hnsw(m=params.m, ef_construction=params.ef_construction, seed=seed)
    else:
        raise InvalidParam(f"unknown index type {index_type!r}")
    engine.freeze()
    return engine


def evaluate_cell(
    corpora: Mapping[str, Corpus],
    cell: GridCell,
    k: int = 10,
    seed: int = 42,
    params: IndexBuildParams | None = None,
    judgments: RelevanceJudgment | None = None,
) -> tuple[float, float, float]:
    """Measure one cell: leave-one-in self-queries over the whole corpus.

    Every document queries the index with its own adapted vector; the
    document itself is excluded from its retrieved set and from its
    relevant set (the same-label judgment already excludes it). Returns
    (precision, recall, mean_query_time_s).
    """
    params = params or IndexBuildParams()
    if cell.model not in corpora:
        raise InvalidParam(f"no corpus for model {cell.model!r}")
    corpus = corpora[cell.model]
    if len(corpus) == 0:
        raise EmptyResults("empty corpus")
    judge = judgments or RelevanceJudgment.same_label(corpus.labels)
    engine = build_cell_engine(corpus, cell.dim, cell.index_type, seed=seed, params=params)
    vectors = adapt_rows(corpus.vectors, cell.dim)

    times = []
    labeled: list[tuple[object, list[SearchHit]]] = []
    for rec, v in zip(corpus.records, vectors):
        spec = QuerySpec(
            vectors=[v],
            k=k + 1,
            threshold=cell.threshold,
            backend=cell.index_type,
            nprobe=params.nprobe if cell.index_type in ("ivf", "hybrid") else None,
            ef_search=max(params.ef_search, k + 1)
            if cell.index_type in ("hnsw", "hybrid")
            else None,
        )
        rs = engine.multi_vector_search(spec)
        hits = [h for h in rs.hits if h.doc_id != rec.id][:k]
        times.append(rs.query_time)
        labeled.append((rec.id, hits))
    precision, recall = precision_recall(labeled, judge)
    return precision, recall, float(np.mean(times))


def run_grid(
    corpora: Mapping[str, Corpus],
    grid: ParameterGrid,
    objective: str = MAX_PRECISION,
    k: int = 10,
    seed: int = 42,
    params: IndexBuildParams | None = None,
    judgments: RelevanceJudgment | None = None,
    evaluate: Callable[[GridCell], tuple[float, float, float]] | None = None,
) -> tuple[TrialResult, list[TrialResult]]:
    """Evaluate every grid cell and pick the best under `objective`.

    `evaluate` overrides the built-in trial function (used for injecting
    known outcomes in tests); it must return (precision, recall,
    mean_query_time_s) for a cell. Failed cells are recorded as failed
    trials and excluded from the argmax. Ties break by enumeration order.
    """
    if objective not in OBJECTIVES:
        raise InvalidParam(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    cells = grid.cells()
    if not cells:
        raise InvalidParam("empty parameter grid")
    trials: list[TrialResult] = []
    for cell in cells:
        try:
            if evaluate is not None:
                precision, recall, mean_t = evaluate(cell)
            else:
                precision, recall, mean_t = evaluate_cell(
                    corpora, cell, k=k, seed=seed, params=params, judgments=judgments
                )
            trials.append(
                TrialResult(
                    model=cell.model,
                    index_type=cell.index_type,
                    dim=cell.dim,
                    threshold=cell.threshold,
                    precision=precision,
                    recall=recall,
                    f1=f1_score(precision, recall),
                    mean_query_time_s=mean_t,
                )
            )
        except SemsearchError as exc:
            trials.append(
                TrialResult(
                    model=cell.model,
                    index_type=cell.index_type,
                    dim=cell.dim,
                    threshold=cell.threshold,
                    precision=0.0,
                    recall=0.0,
                    f1=0.0,
                    mean_query_time_s=0.0,
                    failed=True,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    ok = [t for t in trials if not t.failed]
    if not ok:
        raise EmptyResults("every grid cell failed")
    if objective == MAX_PRECISION:
        best = max(ok, key=lambda t: t.precision)
    else:
        best = max(ok, key=lambda t: t.precision / max(t.mean_query_time_s, TIME_FLOOR_S))
    return best, trials


# ---------------------------------------------------------------------------
# report emission


def write_trials_csv(path: str | Path, trials: Sequence[TrialResult]) -> None:
    """One row per trial; failed trials carry empty metric cells."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)
        for t in trials:
            if t.failed:
                writer.writerow([t.model, t.index_type, t.dim, t.threshold, "", "", "", ""])
            else:
                writer.writerow(
                    [
                        t.model,
                        t.index_type,
                        t.dim,
                        t.threshold,
                        t.precision,
                        t.recall,
                        t.f1,
                        t.mean_query_time_s,
                    ]
                )


def write_trials_json(path: str | Path, trials: Sequence[TrialResult]) -> None:
    payload = [asdict(t) for t in trials]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_trials_csv(path: str | Path) -> list[TrialResult]:
    trials = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            failed = row["precision"] == ""
            trials.append(
                TrialResult(
                    model=row["model"],
                    index_type=row["index_type"],
                    dim=int(row["dim"]),
                    threshold=float(row["threshold"]),
                    precision=float(row["precision"]) if not failed else 0.0,
                    recall=float(row["recall"]) if not failed else 0.0,
                    f1=float(row["f1"]) if not failed else 0.0,
                    mean_query_time_s=float(row["mean_query_time_s"]) if not failed else 0.0,
                    failed=failed,
                )
            )
    return trials


def write_cdf_csv(path: str | Path, cdf: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "cum_fraction"])
        for t, frac in cdf:
            writer.writerow([t, frac])
