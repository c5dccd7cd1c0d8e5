"""Batch export: documents in, embedding file + catalog out.

Input is CSV or NDJSON with columns/keys id, title, text (optional),
label. Output is the retrieval engine's wire format: a ``VSEM`` embedding
file (float32 rows, little-endian, 16-byte header) and an NDJSON catalog
whose record i carries row=i, matching embedding row i.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .models import Encoder, load_encoder
from .preprocess import TextPreprocessor

EMB_MAGIC = b"VSEM"
EMB_VERSION = 1


@dataclass
class SourceDocument:
    id: str
    title: str
    label: str
    text: str | None = None


@dataclass
class ExportJob:
    """One batch-export run; preprocessing defaults mirror the server."""

    input_path: str | Path
    model_name: str
    out_embeddings: str | Path
    out_catalog: str | Path
    batch_size: int = 64
    preprocess: TextPreprocessor = field(default_factory=TextPreprocessor)


def read_documents(path: str | Path) -> list[SourceDocument]:
    """Parse CSV (by .csv suffix) or NDJSON input documents.

    Raises ParseError naming the offending line.
    """
    path = Path(path)
    docs: list[SourceDocument] = []
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "title", "label"} <= set(
                reader.fieldnames
            ):
                raise ParseError(f"{path}:1: need columns id, title, label")
            for lineno, row in enumerate(reader, start=2):
                try:
                    docs.append(
                        SourceDocument(
                            id=row["id"],
                            title=row["title"],
                            label=row["label"],
                            text=row.get("text") or None,
                        )
                    )
                except KeyError as exc:
                    raise ParseError(f"{path}:{lineno}: missing column {exc}") from exc
    else:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    docs.append(
                        SourceDocument(
                            id=str(obj["id"]),
                            title=str(obj["title"]),
                            label=str(obj["label"]),
                            text=obj.get("text"),
                        )
                    )
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}:{lineno}: bad JSON ({exc})") from exc
                except KeyError as exc:
                    raise ParseError(f"{path}:{lineno}: missing key {exc}") from exc
    return docs


def _atomic_write(path: str | Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def write_embedding_file(path: str | Path, vectors: np.ndarray) -> None:
    """Write the VSEM format: header + float32 rows, little-endian."""
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    count, dim = arr.shape
    blob = EMB_MAGIC + struct.pack("<III", EMB_VERSION, count, dim) + arr.tobytes()
    _atomic_write(path, blob)


def write_catalog_file(path: str | Path, docs: list[SourceDocument]) -> None:
    lines = []
    for row, doc in enumerate(docs):
        payload: dict = {"id": doc.id, "title": doc.title}
        if doc.text is not None:
            payload["text"] = doc.text
        payload["label"] = doc.label
        payload["row"] = row
        lines.append(json.dumps(payload, ensure_ascii=False))
    _atomic_write(path, ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))


def encode_texts(
    encoder: Encoder,
    texts: list[str],
    preprocess: TextPreprocessor,
    batch_size: int = 64,
) -> np.ndarray:
    """Preprocess and encode in batches; rows are unit-norm float64."""
    cleaned = [preprocess(t) for t in texts]
    chunks = [
        encoder.encode(cleaned[i : i + batch_size])
        for i in range(0, len(cleaned), batch_size)
    ]
    if not chunks:
        return np.empty((0, encoder.dim), dtype=np.float64)
    return np.vstack(chunks)


def export(job: ExportJob) -> tuple[int, int]:
    """Run the job; returns (document count, embedding dim).

    Titles are what gets encoded; catalog record i corresponds to
    embedding row i. Deterministic for a fixed model and preprocessing
    config.
    """
    docs = read_documents(job.input_path)
    encoder = load_encoder(job.model_name)
    vectors = encode_texts(
        encoder, [d.title for d in docs], job.preprocess, batch_size=job.batch_size
    )
    write_embedding_file(job.out_embeddings, vectors)
    write_catalog_file(job.out_catalog, docs)
    return len(docs), encoder.dim
