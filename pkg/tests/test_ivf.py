"""Inverted-file index: trainer, cell assignment, probe search."""

from __future__ import annotations

import numpy as np
import pytest

from semsearch import ivf
from semsearch.errors import (
    DuplicateId,
    InvalidParam,
    NotTrained,
    TooFewVectors,
)
from semsearch.flat import FlatIndex
from semsearch.ivf import IvfIndex
from semsearch.vectors import normalize

from .conftest import clustered_unit_vectors, random_unit_vectors


def build_ivf(vectors: np.ndarray, nlist: int, seed: int = 42) -> IvfIndex:
    index = IvfIndex(dim=vectors.shape[1], nlist=nlist)
    index.train(vectors, seed=seed)
    for i, v in enumerate(vectors):
        index.add(i, v)
    index.freeze()
    return index


def build_flat(vectors: np.ndarray) -> FlatIndex:
    index = FlatIndex(dim=vectors.shape[1])
    for i, v in enumerate(vectors):
        index.add(i, v)
    index.freeze()
    return index


class TestTrain:
    def test_single_cell_is_normalized_mean(self, rng):
        vectors = random_unit_vectors(rng, 30, 8)
        centroids = ivf.train(vectors, nlist=1, seed=0)
        expected = normalize(vectors.mean(axis=0))
        assert np.max(np.abs(centroids[0] - expected)) < 1e-9

    def test_two_separated_clusters(self, rng):
        vectors, labels = clustered_unit_vectors(rng, 100, 16, 2, noise=0.02)
        centroids = ivf.train(vectors, nlist=2, seed=0)
        # each centroid should sit within 0.05 of one cluster's normalized mean
        means = [normalize(vectors[labels == c].mean(axis=0)) for c in (0, 1)]
        for c in centroids:
            best = min(float(np.linalg.norm(c - m)) for m in means)
            assert best < 0.05

    def test_too_few_vectors(self, rng):
        vectors = random_unit_vectors(rng, 3, 4)
        with pytest.raises(TooFewVectors):
            ivf.train(vectors, nlist=8, seed=0)

    def test_deterministic_per_seed(self, rng):
        vectors = random_unit_vectors(rng, 60, 8)
        a = ivf.train(vectors, nlist=4, seed=7)
        b = ivf.train(vectors, nlist=4, seed=7)
        assert np.array_equal(a, b)

    def test_centroids_unit_norm(self, rng):
        vectors = random_unit_vectors(rng, 60, 8)
        centroids = ivf.train(vectors, nlist=5, seed=1)
        assert np.allclose(np.linalg.norm(centroids, axis=1), 1.0, atol=1e-9)

    def test_default_nlist(self):
        assert ivf.default_nlist(1000) == 32
        assert ivf.default_nlist(1) == 1


class TestAdd:
    def test_add_before_train(self, rng):
        index = IvfIndex(dim=4, nlist=2)
        with pytest.raises(NotTrained):
            index.add(0, random_unit_vectors(rng, 1, 4)[0])

    def test_single_cell_bucket_grows(self, rng):
        vectors = random_unit_vectors(rng, 10, 4)
        index = IvfIndex(dim=4, nlist=1)
        index.train(vectors, seed=0)
        for i, v in enumerate(vectors):
            index.add(i, v)
        index.freeze()
        assert index.cell_sizes() == [10]

    def test_vector_equal_to_centroid_assigned_there(self, rng):
        vectors, _ = clustered_unit_vectors(rng, 40, 8, 2, noise=0.02)
        index = IvfIndex(dim=8, nlist=2)
        index.train(vectors, seed=0)
        assert index.centroids is not None
        for j in range(2):
            index.add(f"c{j}", index.centroids[j])
        assert index.cell_of(0) == 0
        assert index.cell_of(1) == 1

    def test_duplicate_id(self, rng):
        vectors = random_unit_vectors(rng, 4, 4)
        index = IvfIndex(dim=4, nlist=1)
        index.train(vectors, seed=0)
        index.add("x", vectors[0])
        with pytest.raises(DuplicateId):
            index.add("x", vectors[1])

    def test_every_vector_in_exactly_one_cell(self, rng):
        vectors = random_unit_vectors(rng, 64, 8)
        index = build_ivf(vectors, nlist=8)
        assert sum(index.cell_sizes()) == 64


class TestSearch:
    def test_exhaustive_probe_equals_flat(self, rng):
        vectors = random_unit_vectors(rng, 200, 16)
        index = build_ivf(vectors, nlist=8)
        oracle = build_flat(vectors)
        for q in random_unit_vectors(rng, 25, 16):
            got = index.search(q, k=10, nprobe=8)
            want = oracle.search(q, k=10)
            assert [h.doc_id for h in got] == [h.doc_id for h in want]
            for a, b in zip(got, want):
                assert a.score == pytest.approx(b.score, abs=1e-9)

    def test_nprobe_range_enforced(self, rng):
        vectors = random_unit_vectors(rng, 20, 4)
        index = build_ivf(vectors, nlist=4)
        q = random_unit_vectors(rng, 1, 4)[0]
        with pytest.raises(InvalidParam):
            index.search(q, k=3, nprobe=0)
        with pytest.raises(InvalidParam):
            index.search(q, k=3, nprobe=5)

    def test_clustered_recall_at_10(self, rng):
        vectors, _ = clustered_unit_vectors(rng, 1000, 32, 16, noise=0.08)
        index = build_ivf(vectors, nlist=16)
        oracle = build_flat(vectors)
        queries = clustered_unit_vectors(rng, 50, 32, 16, noise=0.08)[0]
        overlaps = []
        for q in queries:
            got = {h.doc_id for h in index.search(q, k=10, nprobe=4)}
            want = {h.doc_id for h in oracle.search(q, k=10)}
            overlaps.append(len(got & want) / 10)
        assert float(np.mean(overlaps)) >= 0.8

    def test_recall_non_decreasing_in_nprobe(self, rng):
        vectors = random_unit_vectors(rng, 400, 16)
        index = build_ivf(vectors, nlist=16)
        oracle = build_flat(vectors)
        queries = random_unit_vectors(rng, 100, 16)
        recalls = []
        for nprobe in (1, 2, 4, 8, 16):
            overlaps = []
            for q in queries:
                got = {h.doc_id for h in index.search(q, k=10, nprobe=nprobe)}
                want = {h.doc_id for h in oracle.search(q, k=10)}
                overlaps.append(len(got & want) / 10)
            recalls.append(float(np.mean(overlaps)))
        for lo, hi in zip(recalls, recalls[1:]):
            assert hi >= lo - 0.01
        assert recalls[-1] == pytest.approx(1.0)

    def test_completeness_under_full_probe(self, rng):
        vectors = random_unit_vectors(rng, 50, 8)
        index = build_ivf(vectors, nlist=7)
        recovered = set()
        for q in vectors:
            for h in index.search(q, k=50, nprobe=7):
                recovered.add(h.doc_id)
        assert recovered == set(range(50))

    def test_deterministic(self, rng):
        vectors = random_unit_vectors(rng, 120, 8)
        q = random_unit_vectors(rng, 1, 8)[0]
        a = build_ivf(vectors, nlist=6, seed=3).search(q, k=10, nprobe=2)
        b = build_ivf(vectors, nlist=6, seed=3).search(q, k=10, nprobe=2)
        assert a == b
