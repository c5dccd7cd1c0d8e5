"""Encoder registry.

Three pretrained transformer families are wrapped behind one interface,
plus a dependency-free deterministic feature-hashing encoder used in
tests and offline environments. Heavy imports happen lazily so the base
install works without torch; a missing backend surfaces as
ModelLoadError when the model is first requested.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import ModelLoadError

# pinned upstream names for the registry's short aliases
MODEL_ALIASES = {
    "minilm": "sentence-transformers/all-MiniLM-L6-v2",
    "all-MiniLM-L6-v2": "sentence-transformers/all-MiniLM-L6-v2",
    "bert": "bert-base-uncased",
    "bert-base-uncased": "bert-base-uncased",
    "roberta": "roberta-base",
    "roberta-base": "roberta-base",
}


class Encoder:
    """Text-to-unit-vector encoder interface."""

    name: str
    dim: int

    def encode(self, texts: list[str]) -> np.ndarray:
        """Return an (n, dim) float64 matrix of unit rows."""
        raise NotImplementedError


def _l2_normalize(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


class HashingEncoder(Encoder):
    """Deterministic bag-of-tokens feature hashing.

    Each token maps to a bucket and sign via blake2b of the token bytes;
    the token counts accumulate and the row is L2-normalized. No weights,
    no downloads, bit-for-bit reproducible everywhere. Quality is far
    below a transformer; it exists for tests, demos, and air-gapped runs.
    """

    def __init__(self, dim: int = 384, name: str = "hash"):
        self.name = name
        self.dim = dim

    def _bucket(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        return value % self.dim, 1.0 if (value >> 63) & 1 == 0 else -1.0

    def encode(self, texts: list[str]) -> np.ndarray:
        from .preprocess import tokenize

        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = tokenize(text) or [""]
            for token in tokens:
                bucket, sign = self._bucket(token)
                out[i, bucket] += sign
            if not np.any(out[i]):
                # all tokens cancelled: fall back to a fixed direction
                bucket, sign = self._bucket("")
                out[i, bucket] = sign
        return _l2_normalize(out)


class SentenceTransformerEncoder(Encoder):
    """sentence-transformers models (the MiniLM family)."""

    def __init__(self, model_name: str, alias: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(f"sentence-transformers unavailable: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_name!r}: {exc}") from exc
        self.name = alias
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=False
        )
        return _l2_normalize(np.asarray(vectors, dtype=np.float64))


class MeanPoolingEncoder(Encoder):
    """transformers models (BERT/RoBERTa) with masked mean pooling."""

    def __init__(self, model_name: str, alias: str):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"transformers/torch unavailable: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_name)
            self._model = AutoModel.from_pretrained(model_name)
            self._model.eval()
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_name!r}: {exc}") from exc
        self._torch = torch
        self.name = alias
        self.dim = int(self._model.config.hidden_size)

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            batch = self._tokenizer(
                texts, padding=True, truncation=True, return_tensors="pt"
            )
            hidden = self._model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1e-9)
        return _l2_normalize(pooled.numpy().astype(np.float64))


def load_encoder(name: str, hash_dim: int = 384) -> Encoder:
    """Resolve a model name to an encoder instance.

    Known aliases: minilm / bert / roberta (pinned upstream checkpoints),
    hash (offline deterministic). Unknown names are tried as
    sentence-transformers checkpoints.
    """
    if name in ("hash", "hashing"):
        return HashingEncoder(dim=hash_dim, name=name)
    resolved = MODEL_ALIASES.get(name, name)
    if resolved == "sentence-transformers/all-MiniLM-L6-v2":
        return SentenceTransformerEncoder(resolved, alias=name)
    if resolved in ("bert-base-uncased", "roberta-base"):
        return MeanPoolingEncoder(resolved, alias=name)
    return SentenceTransformerEncoder(resolved, alias=name)
