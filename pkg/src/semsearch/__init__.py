"""Document retrieval over semantic embeddings.

Exact (flat), inverted-file (IVF), and graph (HNSW) cosine indexes behind
one engine with single- and multi-vector queries, similarity-threshold
filtering, grid-search tuning, and bit-exact on-disk formats.
"""

from .config import GridConfig, IndexConfig, RunConfig, SearchConfig
from .engine import QuerySpec, ResultSet, SearchEngine
from .evaluation import (
    GridCell,
    IndexBuildParams,
    ParameterGrid,
    QueryTimeStats,
    RelevanceJudgment,
    TrialResult,
    precision_recall,
    query_time_stats,
    recall_at_k,
    run_grid,
)
from .flat import FlatIndex
from .hits import SearchHit
from .hnsw import HnswIndex
from .ivf import IvfIndex
from .storage import (
    Corpus,
    DocumentRecord,
    load_corpus,
    load_index,
    read_catalog,
    read_embeddings,
    save_index,
    write_catalog,
    write_embeddings,
)
from .vectors import adapt_dimension, cosine_similarity, distance, normalize

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "DocumentRecord",
    "FlatIndex",
    "GridCell",
    "GridConfig",
    "HnswIndex",
    "IndexBuildParams",
    "IndexConfig",
    "IvfIndex",
    "ParameterGrid",
    "QuerySpec",
    "QueryTimeStats",
    "RelevanceJudgment",
    "ResultSet",
    "RunConfig",
    "SearchConfig",
    "SearchEngine",
    "SearchHit",
    "TrialResult",
    "adapt_dimension",
    "cosine_similarity",
    "distance",
    "load_corpus",
    "load_index",
    "normalize",
    "precision_recall",
    "query_time_stats",
    "read_catalog",
    "read_embeddings",
    "recall_at_k",
    "run_grid",
    "save_index",
    "write_catalog",
    "write_embeddings",
]
