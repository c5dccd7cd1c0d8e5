"""Command-line surface: configs, commands, artifact outputs."""

from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from semsearch.cli import main
from semsearch.config import RunConfig
from semsearch.errors import ConfigError
from semsearch.storage import DocumentRecord, write_catalog, write_embeddings

from .conftest import clustered_unit_vectors


@pytest.fixture
def corpus_files(tmp_path, rng):
    vectors, labels = clustered_unit_vectors(rng, 60, 16, 3, noise=0.04)
    emb = tmp_path / "emb.vsem"
    cat = tmp_path / "cat.ndjson"
    write_embeddings(emb, vectors.astype(np.float32))
    write_catalog(
        cat,
        [
            DocumentRecord(id=f"d{i}", title=f"title {i}", label=f"topic-{int(l)}", row=i)
            for i, l in enumerate(labels)
        ],
    )
    return emb, cat


def write_config(tmp_path, emb, cat, **overrides):
    cfg = {
        "embedding_path": str(emb),
        "catalog_path": str(cat),
        "search": {"k": 10, "threshold": -1.0},
        "grid": {
            "dims": [8, 16],
            "thresholds": [0.5, 0.7],
            "models": ["default"],
            "index_types": ["flat"],
        },
        "seed": 42,
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestRunConfig:
    def test_unknown_top_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"embedding_path": "x", "catalog_path": "y", "bogus": 1}))
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_unknown_nested_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(
            json.dumps(
                {"embedding_path": "x", "catalog_path": "y", "index": {"typ": "flat"}}
            )
        )
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"embedding_path": "x", "catalog_path": "y"}))
        cfg = RunConfig.from_file(path)
        assert cfg.search.k == 10
        assert cfg.index.M == 16
        assert cfg.index.ef_construction == 200
        assert cfg.index.ef_search == 100
        assert cfg.seed == 42
        assert cfg.grid.dims == [256, 512, 1024]
        assert cfg.grid.thresholds == [0.7, 0.8, 0.9]

    def test_model_placeholder(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(
            json.dumps({"embedding_path": "/data/{model}.vsem", "catalog_path": "y"})
        )
        cfg = RunConfig.from_file(path)
        assert cfg.embedding_path_for("minilm") == "/data/minilm.vsem"


class TestIngest:
    def test_writes_validated_corpus(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat, subset=20)
        out = tmp_path / "out"
        assert main(["ingest", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["documents"] == 20
        assert summary["dim"] == 16
        assert (out / "embeddings.vsem").exists()
        assert (out / "catalog.ndjson").exists()


class TestBuild:
    def test_snapshot_written(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat)
        out = tmp_path / "out"
        assert main(["build", "--config", str(config), "--out", str(out)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["documents"] == 60
        assert (out / "index_flat.vsix").exists()

    def test_backend_override(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat)
        out = tmp_path / "out"
        code = main(
            ["build", "--config", str(config), "--out", str(out), "--backend", "hnsw"]
        )
        assert code == 0
        assert (out / "index_hnsw.vsix").exists()


class TestSearch:
    def test_saturation_small_corpus(self, tmp_path, rng, capsys):
        vectors = clustered_unit_vectors(rng, 3, 8, 1, noise=0.05)[0]
        emb = tmp_path / "e.vsem"
        cat = tmp_path / "c.ndjson"
        write_embeddings(emb, vectors.astype(np.float32))
        write_catalog(
            cat,
            [DocumentRecord(id=f"d{i}", title=f"t{i}", label="x", row=i) for i in range(3)],
        )
        qfile = tmp_path / "q.vsem"
        write_embeddings(qfile, vectors[:1].astype(np.float32))
        config = write_config(tmp_path, emb, cat)
        code = main(
            ["search", "--config", str(config), "--query-vectors", str(qfile), "--k", "5"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["hits"]) == 3
        assert payload["hits"][0]["doc_id"] == "d0"

    def test_multi_vector_query_file(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        vectors = clustered_unit_vectors(np.random.default_rng(1), 2, 16, 2, noise=0.02)[0]
        qfile = tmp_path / "q.vsem"
        write_embeddings(qfile, vectors.astype(np.float32))
        config = write_config(tmp_path, emb, cat)
        code = main(["search", "--config", str(config), "--query-vectors", str(qfile)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["query_time_s"] > 0

    def test_missing_query_errors(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat)
        code = main(["search", "--config", str(config)])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("ERROR ConfigError:")

    def test_unreachable_embedder_reported(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(
            tmp_path, emb, cat, embedder_url="http://127.0.0.1:1"
        )
        code = main(["search", "--config", str(config), "--query-text", "hello"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ERROR EmbedderError:")


class TestTune:
    def test_grid_size_and_artifacts(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(
            tmp_path,
            emb,
            cat,
            grid={
                "dims": [8, 12, 16],
                "thresholds": [0.5, 0.6, 0.7],
                "models": ["default"],
                "index_types": ["flat"],
            },
        )
        out = tmp_path / "out"
        assert main(["tune", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["trials"] == 9
        with open(out / "trials.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 10  # header + 9 cells
        assert rows[0][:4] == ["model", "index_type", "dim", "threshold"]
        trials_json = json.loads((out / "trials.json").read_text())
        assert len(trials_json) == 9

    def test_determinism_excluding_timing(self, tmp_path, corpus_files):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["tune", "--config", str(config), "--out", str(out1)]) == 0
        assert main(["tune", "--config", str(config), "--out", str(out2)]) == 0

        def strip_timing(path):
            with open(path) as fh:
                rows = list(csv.reader(fh))
            drop = rows[0].index("mean_query_time_s")
            return [[c for i, c in enumerate(row) if i != drop] for row in rows]

        assert strip_timing(out1 / "trials.csv") == strip_timing(out2 / "trials.csv")


class TestBench:
    def test_flat_self_recall_and_cdf(self, tmp_path, corpus_files, capsys):
        emb, cat = corpus_files
        config = write_config(tmp_path, emb, cat)
        out = tmp_path / "out"
        assert main(["bench", "--config", str(config), "--out", str(out)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["recall_at_10"] == 1.0
        assert payload["recall_at_100"] == 1.0
        with open(out / "cdf.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["time_s", "cum_fraction"]
        assert float(rows[-1][1]) == 1.0


class TestErrorSurface:
    def test_bad_config_path(self, capsys):
        code = main(["ingest", "--config", "/nonexistent.json", "--out", "/tmp/x"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ERROR ConfigError:")

    def test_bad_magic_reported(self, tmp_path, capsys):
        emb = tmp_path / "bad.vsem"
        emb.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        cat = tmp_path / "c.ndjson"
        write_catalog(cat, [DocumentRecord(id="a", title="t", label="l", row=0)])
        config = write_config(tmp_path, emb, cat)
        code = main(["ingest", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 1
        assert capsys.readouterr().err.startswith("ERROR BadMagic:")
