"""The /embed HTTP contract."""

from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embedkit.models import HashingEncoder
from embedkit.server import create_app


@pytest.fixture
def client():
    return TestClient(create_app(HashingEncoder(dim=64)))


class TestEmbed:
    def test_contract_shape(self, client):
        resp = client.post("/embed", json={"texts": ["hello"], "model": "hash"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["dim"] == 64
        assert len(body["vectors"]) == 1
        assert len(body["vectors"][0]) == 64
        norm = float(np.linalg.norm(body["vectors"][0]))
        assert abs(norm - 1.0) < 1e-6

    def test_same_text_twice_identical(self, client):
        resp = client.post("/embed", json={"texts": ["dup", "dup"]})
        vectors = resp.json()["vectors"]
        assert vectors[0] == vectors[1]

    def test_empty_texts_422(self, client):
        resp = client.post("/embed", json={"texts": []})
        assert resp.status_code == 422

    def test_malformed_json_400(self, client):
        resp = client.post(
            "/embed", content=b"{not json", headers={"Content-Type": "application/json"}
        )
        assert resp.status_code == 400

    def test_model_mismatch_422(self, client):
        resp = client.post("/embed", json={"texts": ["x"], "model": "other-model"})
        assert resp.status_code == 422

    def test_model_optional(self, client):
        resp = client.post("/embed", json={"texts": ["x"]})
        assert resp.status_code == 200


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json()["dim"] == 64
