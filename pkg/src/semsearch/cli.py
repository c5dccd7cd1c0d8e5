"""Command-line entry point: ingest, build, search, tune, bench.

Every command takes --config pointing at a RunConfig JSON file and writes
machine-readable artifacts into --out; a human-oriented summary goes to
stdout. Failures exit nonzero with one parseable line on stderr:
``ERROR <Category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import urllib.request
from pathlib import Path

import numpy as np

from . import storage
from .config import RunConfig
from .engine import QuerySpec, SearchEngine
from .errors import ConfigError, EmbedderError, EmptyQuery, SemsearchError
from .evaluation import (
    IndexBuildParams,
    ParameterGrid,
    query_time_stats,
    recall_at_k,
    run_grid,
    write_cdf_csv,
    write_trials_csv,
    write_trials_json,
)
from .storage import load_corpus
from .vectors import adapt_rows, normalize_rows


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "backend", None) is not None:
        cfg.index.type = args.backend
    if getattr(args, "k", None) is not None:
        cfg.search.k = args.k
    if getattr(args, "threshold", None) is not None:
        cfg.search.threshold = args.threshold
    return cfg


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_engine(
    cfg: RunConfig, corpus: storage.Corpus, ensure_flat: bool = False
) -> SearchEngine:
    dim = cfg.index.dim or corpus.dim
    vectors = adapt_rows(corpus.vectors, dim)
    engine = SearchEngine(dim=dim)
    for rec, v in zip(corpus.records, vectors):
        engine.add_document(rec.id, v, record=rec)
    itype = cfg.index.type
    if itype == "flat" or ensure_flat:
        engine.build_flat()
    if itype in ("ivf", "hybrid"):
        engine.build_ivf(nlist=cfg.index.nlist, seed=cfg.seed)
    if itype in ("hnsw", "hybrid"):
        engine.build_hnsw(
            m=cfg.index.M, ef_construction=cfg.index.ef_construction, seed=cfg.seed
        )
    engine.freeze()
    return engine


def cmd_ingest(args: argparse.Namespace) -> int:
    """Validate inputs and write the (subset) corpus into --out."""
    cfg = _load_config(args)
    out = _out_dir(args)
    corpus = load_corpus(cfg.embedding_path, cfg.catalog_path, subset=cfg.subset)
    # rows are re-numbered dense in subset order
    records = [
        storage.DocumentRecord(id=r.id, title=r.title, label=r.label, row=i, text=r.text)
        for i, r in enumerate(corpus.records)
    ]
    content_hash = storage.write_embeddings(out / "embeddings.vsem", corpus.vectors)
    storage.write_catalog(out / "catalog.ndjson", records)
    summary = {
        "documents": len(records),
        "dim": corpus.dim if len(records) else 0,
        "labels": sorted({r.label for r in records}),
        "embedding_file": str(out / "embeddings.vsem"),
        "catalog_file": str(out / "catalog.ndjson"),
        "content_hash": content_hash,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    """Build the configured index and snapshot it into --out."""
    cfg = _load_config(args)
    out = _out_dir(args)
    corpus = load_corpus(cfg.embedding_path, cfg.catalog_path, subset=cfg.subset)
    t0 = time.perf_counter()
    engine = _build_engine(cfg, corpus)
    build_time = time.perf_counter() - t0
    stats: dict = {
        "index_type": cfg.index.type,
        "documents": len(corpus),
        "dim": engine.dim,
        "build_time_s": round(build_time, 6),
    }
    snapshots = {}
    for name, index in (("flat", engine.flat), ("ivf", engine.ivf), ("hnsw", engine.hnsw)):
        if index is None:
            continue
        path = out / f"index_{name}.vsix"
        storage.save_index(path, index)
        snapshots[name] = str(path)
        if name == "ivf":
            stats["nlist"] = index.nlist
            stats["cell_sizes"] = index.cell_sizes()
        if name == "hnsw":
            stats["max_level"] = index.max_level
    stats["snapshots"] = snapshots
    print(json.dumps(stats, indent=2, sort_keys=True))
    return 0


def _embed_texts(url: str, texts: list[str], model: str) -> np.ndarray:
    """POST /embed on the configured embedder and return unit vectors."""
    payload = json.dumps({"texts": texts, "model": model}).encode("utf-8")
    req = urllib.request.Request(
        url.rstrip("/") + "/embed",
        data=payload,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req) as resp:
            body = json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", errors="replace")[:200]
        raise EmbedderError(f"embedder answered {exc.code}: {detail}") from exc
    except urllib.error.URLError as exc:
        raise EmbedderError(f"cannot reach embedder at {url}: {exc.reason}") from exc
    except json.JSONDecodeError as exc:
        raise EmbedderError(f"embedder returned invalid JSON: {exc}") from exc
    vectors = np.asarray(body.get("vectors"), dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] != len(texts) or vectors.shape[1] != int(
        body.get("dim", -1)
    ):
        raise EmbedderError(f"embedder returned inconsistent shape {vectors.shape}")
    return vectors


def cmd_search(args: argparse.Namespace) -> int:
    """Answer one (possibly multi-vector) query; print the ResultSet JSON."""
    cfg = _load_config(args)
    corpus = load_corpus(cfg.embedding_path, cfg.catalog_path, subset=cfg.subset)
    engine = _build_engine(cfg, corpus)

    if args.query_vectors:
        raw = storage.read_embeddings(args.query_vectors)
        if raw.shape[0] == 0:
            raise EmptyQuery("query vector file holds no rows")
        queries = adapt_rows(raw, engine.dim)
    elif args.query_text:
        if not cfg.embedder_url:
            raise ConfigError("text queries require embedder_url in the config")
        model = cfg.grid.models[0] if cfg.grid.models else "default"
        raw = _embed_texts(cfg.embedder_url, list(args.query_text), model)
        queries = adapt_rows(raw, engine.dim)
    else:
        raise ConfigError("provide --query-vectors FILE or --query-text TEXT")

    spec = QuerySpec(
        vectors=[queries[i] for i in range(queries.shape[0])],
        k=cfg.search.k,
        threshold=cfg.search.threshold,
        backend=cfg.index.type,
        nprobe=cfg.index.nprobe,
        ef_search=max(cfg.index.ef_search, cfg.search.k),
    )
    rs = engine.multi_vector_search(spec)
    payload = {
        "query_time_s": rs.query_time,
        "hits": [
            {
                "doc_id": h.doc_id,
                "score": h.score,
                "rank": h.rank,
                "title": getattr(engine.record_of(h.doc_id), "title", None),
                "label": getattr(engine.record_of(h.doc_id), "label", None),
            }
            for h in rs.hits
        ],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        out = _out_dir(args)
        (out / "results.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    """Sweep the configured grid; write trials.csv/.json; print the best cell."""
    cfg = _load_config(args)
    out = _out_dir(args)
    corpora = {
        model: load_corpus(
            cfg.embedding_path_for(model), cfg.catalog_path, subset=cfg.subset
        )
        for model in cfg.grid.models
    }
    grid = ParameterGrid(
        dims=cfg.grid.dims,
        thresholds=cfg.grid.thresholds,
        models=cfg.grid.models,
        index_types=cfg.grid.index_types,
    )
    params = IndexBuildParams(
        m=cfg.index.M,
        ef_construction=cfg.index.ef_construction,
        ef_search=cfg.index.ef_search,
        nlist=cfg.index.nlist,
        nprobe=cfg.index.nprobe,
    )
    best, trials = run_grid(
        corpora,
        grid,
        objective=cfg.objective,
        k=cfg.search.k,
        seed=cfg.seed,
        params=params,
    )
    write_trials_csv(out / "trials.csv", trials)
    write_trials_json(out / "trials.json", trials)
    summary = {
        "objective": cfg.objective,
        "trials": len(trials),
        "failed": sum(1 for t in trials if t.failed),
        "best": {
            "model": best.model,
            "index_type": best.index_type,
            "dim": best.dim,
            "threshold": best.threshold,
            "precision": best.precision,
            "recall": best.recall,
            "f1": best.f1,
            "mean_query_time_s": best.mean_query_time_s,
        },
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """Self-query the corpus; emit the query-time CDF and oracle recall."""
    cfg = _load_config(args)
    out = _out_dir(args)
    corpus = load_corpus(cfg.embedding_path, cfg.catalog_path, subset=cfg.subset)
    engine = _build_engine(cfg, corpus, ensure_flat=True)

    dim = engine.dim
    vectors = adapt_rows(corpus.vectors, dim)
    backend = cfg.index.type
    times: list[float] = []
    recalls: dict[str, float] = {}
    for k_eval in (10, 100):
        results = []
        oracle = []
        for i in range(vectors.shape[0]):
            q = vectors[i]
            spec = QuerySpec(
                vectors=[q],
                k=k_eval,
                threshold=-1.0,
                backend=backend,
                nprobe=cfg.index.nprobe,
                ef_search=max(cfg.index.ef_search, k_eval),
            )
            rs = engine.multi_vector_search(spec)
            results.append(rs.hits)
            oracle.append(engine.flat.search(q, k_eval))
            if k_eval == 10:
                times.append(rs.query_time)
        recalls[f"recall_at_{k_eval}"] = recall_at_k(
            results, oracle, k_eval, corpus_size=len(engine)
        )

    stats = query_time_stats(times)
    write_cdf_csv(out / "cdf.csv", stats.cdf)
    payload = {
        "backend": backend,
        "queries": len(times),
        "recall_at_10": recalls["recall_at_10"],
        "recall_at_100": recalls["recall_at_100"],
        "query_time_s": {
            "mean": stats.mean,
            "p50": stats.p50,
            "p90": stats.p90,
            "p99": stats.p99,
        },
    }
    (out / "results.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semsearch",
        description="Vector document retrieval: ingest, build, search, tune, bench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
        p.add_argument("--config", required=True, help="RunConfig JSON file")
        if out_required:
            p.add_argument("--out", required=True, help="output directory")
        else:
            p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--backend", default=None, help="override index.type")
        p.add_argument("--k", type=int, default=None, help="override search.k")
        p.add_argument("--threshold", type=float, default=None, help="override search.threshold")

    p_ingest = sub.add_parser("ingest", help="validate and copy the corpus")
    common(p_ingest)
    p_ingest.set_defaults(func=cmd_ingest)

    p_build = sub.add_parser("build", help="build and snapshot the configured index")
    common(p_build)
    p_build.set_defaults(func=cmd_build)

    p_search = sub.add_parser("search", help="run one query")
    common(p_search, out_required=False)
    p_search.add_argument("--query-vectors", default=None, help="embedding file of query rows")
    p_search.add_argument(
        "--query-text",
        action="append",
        default=None,
        help="text query (repeatable; requires embedder_url)",
    )
    p_search.set_defaults(func=cmd_search)

    p_tune = sub.add_parser("tune", help="grid-search hyperparameters")
    common(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_bench = sub.add_parser("bench", help="measure query times and oracle recall")
    common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SemsearchError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
