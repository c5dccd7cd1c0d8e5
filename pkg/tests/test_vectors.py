"""Vector math primitives."""

from __future__ import annotations

import numpy as np
import pytest

from semsearch.errors import DimMismatch, ZeroVector
from semsearch.vectors import (
    adapt_dimension,
    adapt_rows,
    batch_cosine,
    cosine_similarity,
    distance,
    normalize,
    normalize_rows,
)

from .conftest import random_unit_vectors


class TestNormalize:
    def test_three_four_five(self):
        out = normalize(np.array([3.0, 4.0]))
        assert np.allclose(out, [0.6, 0.8])

    def test_already_unit(self):
        out = normalize(np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [1.0, 0.0, 0.0])

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            normalize(np.array([0.0, 0.0]))

    def test_nan_rejected(self):
        with pytest.raises(ZeroVector):
            normalize(np.array([1.0, np.nan]))

    def test_idempotent(self, rng):
        for _ in range(50):
            e = rng.normal(size=16)
            once = normalize(e)
            twice = normalize(once)
            assert np.max(np.abs(twice - once)) < 1e-6

    def test_scale_invariance(self, rng):
        for _ in range(50):
            e = rng.normal(size=8)
            c = float(rng.uniform(0.01, 100.0))
            assert np.max(np.abs(normalize(c * e) - normalize(e))) < 1e-6


class TestCosine:
    def test_self_similarity(self, rng):
        a = normalize(rng.normal(size=32))
        assert cosine_similarity(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        assert cosine_similarity(a, b) == 0.0

    def test_antipodal(self, rng):
        a = normalize(rng.normal(size=16))
        assert cosine_similarity(a, -a) == pytest.approx(-1.0, abs=1e-12)

    def test_symmetric_exactly(self, rng):
        for _ in range(50):
            a = normalize(rng.normal(size=12))
            b = normalize(rng.normal(size=12))
            assert cosine_similarity(a, b) == cosine_similarity(b, a)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine_similarity(np.ones(3) / np.sqrt(3), np.ones(4) / 2.0)

    def test_clamped(self):
        # slightly denormal inputs must still land inside [-1, 1]
        a = np.array([1.0 + 1e-9, 0.0])
        assert cosine_similarity(a, a) <= 1.0


class TestDistance:
    def test_identical(self, rng):
        a = normalize(rng.normal(size=8))
        assert distance(a, a) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        assert distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0

    def test_antipodal(self, rng):
        a = normalize(rng.normal(size=8))
        assert distance(a, -a) == pytest.approx(2.0, abs=1e-12)

    def test_equals_one_minus_sim(self, rng):
        a = normalize(rng.normal(size=8))
        b = normalize(rng.normal(size=8))
        assert distance(a, b) == 1.0 - cosine_similarity(a, b)

    def test_symmetric_and_nonnegative(self, rng):
        for _ in range(25):
            a = normalize(rng.normal(size=8))
            b = normalize(rng.normal(size=8))
            assert distance(a, b) == distance(b, a)
            assert 0.0 <= distance(a, b) <= 2.0


class TestAdaptDimension:
    def test_truncation_is_prefix(self, rng):
        e = rng.normal(size=384)
        out = adapt_dimension(e, 256)
        assert out.shape == (256,)
        assert np.array_equal(out, e[:256])

    def test_identity(self, rng):
        e = rng.normal(size=384)
        out = adapt_dimension(e, 384)
        assert np.array_equal(out, e)

    def test_padding(self, rng):
        e = rng.normal(size=384)
        out = adapt_dimension(e, 512)
        assert out.shape == (512,)
        assert np.array_equal(out[:384], e)
        assert np.all(out[384:] == 0.0)

    def test_zero_prefix_rejected(self):
        e = np.array([0.0, 0.0, 1.0])
        with pytest.raises(ZeroVector):
            adapt_dimension(e, 2)

    def test_adapt_rows_renormalizes(self, rng):
        m = random_unit_vectors(rng, 20, 48)
        out = adapt_rows(m, 16)
        assert out.shape == (20, 16)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-9)
        # padding keeps both values and norm
        padded = adapt_rows(m, 64)
        assert np.allclose(padded[:, :48], m, atol=1e-12)


class TestBatchOps:
    def test_batch_matches_scalar(self, rng):
        m = random_unit_vectors(rng, 30, 24)
        q = normalize(rng.normal(size=24))
        batch = batch_cosine(m, q)
        for i in range(30):
            assert batch[i] == pytest.approx(cosine_similarity(m[i], q), abs=1e-12)

    def test_normalize_rows(self, rng):
        m = rng.normal(size=(10, 6))
        out = normalize_rows(m)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)

    def test_normalize_rows_zero_row(self):
        m = np.zeros((3, 4))
        m[0, 0] = 1.0
        m[2, 1] = 1.0
        with pytest.raises(ZeroVector):
            normalize_rows(m)
