"""On-disk formats: embedding matrices, document catalogs, index snapshots.

Three formats, all little-endian, all written atomically (temp file +
rename):

* Embedding file: magic ``VSEM``, u32 version=1, u32 count, u32 dim,
  then count*dim float32 values row-major. Size is exactly
  16 + 4*count*dim bytes; round-trips are bitwise.
* Document catalog: UTF-8 NDJSON, one record per line with keys
  id, title, text (optional), label, row. Rows are unique and dense in
  [0, count); ids unique.
* Index snapshot: magic ``VSIX``, u32 version, 4-byte type tag, u32 dim,
  u64 body length, body, u32 CRC32 of the body. The body holds a JSON
  header plus raw array payloads; a reloaded index answers every query
  identically to the saved one.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    ChecksumMismatch,
    DimMismatch,
    DuplicateId,
    IndexNotFrozen,
    RowOutOfRange,
    TruncatedFile,
    TypeMismatch,
    VersionUnsupported,
)
from .flat import FlatIndex
from .hnsw import HnswIndex
from .ivf import IvfIndex

EMB_MAGIC = b"VSEM"
EMB_VERSION = 1
SNAP_MAGIC = b"VSIX"
SNAP_VERSION = 1
TYPE_TAGS = {"flat": b"FLAT", "ivf": b"IVF_", "hnsw": b"HNSW"}
TAG_TYPES = {v: k for k, v in TYPE_TAGS.items()}


def _atomic_write(path: str | Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# embedding files


def write_embeddings(path: str | Path, vectors: np.ndarray) -> str:
    """Write an (n, dim) matrix as float32 and return its content hash.

    The returned sha256 hex digest covers the full file bytes; reading the
    file back later and hashing it reproduces the same digest (cache-hit
    check without re-encoding anything).
    """
    arr = np.ascontiguousarray(np.asarray(vectors), dtype="<f4")
    if arr.ndim != 2:
        raise DimMismatch(f"expected (n, dim) matrix, got shape {arr.shape}")
    count, dim = arr.shape
    blob = EMB_MAGIC + struct.pack("<III", EMB_VERSION, count, dim) + arr.tobytes()
    _atomic_write(path, blob)
    return hashlib.sha256(blob).hexdigest()


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read a float32 (count, dim) matrix, verifying magic/version/size."""
    blob = Path(path).read_bytes()
    if len(blob) < 16:
        raise TruncatedFile(f"{path}: {len(blob)} bytes is shorter than the header")
    if blob[:4] != EMB_MAGIC:
        raise BadMagic(f"{path}: magic {blob[:4]!r} != {EMB_MAGIC!r}")
    version, count, dim = struct.unpack("<III", blob[4:16])
    if version != EMB_VERSION:
        raise VersionUnsupported(f"{path}: version {version}")
    expected = 16 + 4 * count * dim
    if len(blob) != expected:
        raise TruncatedFile(f"{path}: {len(blob)} bytes, header implies {expected}")
    payload = np.frombuffer(blob[16:], dtype="<f4")
    return payload.reshape(count, dim).copy()


def embedding_file_hash(path: str | Path) -> str:
    """sha256 of the file bytes, matching write_embeddings' return value."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# document catalogs


@dataclass
class DocumentRecord:
    """One catalog entry joined 1:1 with an embedding row."""

    id: str
    title: str
    label: str
    row: int
    text: str | None = None


@dataclass
class Corpus:
    """Documents joined with their embedding rows, in catalog order.

    vectors[i] is the float32 embedding of records[i].
    """

    records: list[DocumentRecord]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def labels(self) -> dict[str, str]:
        return {r.id: r.label for r in self.records}


def write_catalog(path: str | Path, records: list[DocumentRecord]) -> None:
    lines = []
    for r in records:
        payload: dict = {"id": r.id, "title": r.title}
        if r.text is not None:
            payload["text"] = r.text
        payload["label"] = r.label
        payload["row"] = r.row
        lines.append(json.dumps(payload, ensure_ascii=False))
    _atomic_write(path, ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))


def read_catalog(path: str | Path) -> list[DocumentRecord]:
    """Parse NDJSON records and enforce id/row uniqueness and row density."""
    records: list[DocumentRecord] = []
    seen_ids: set[str] = set()
    seen_rows: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TruncatedFile(f"{path}:{lineno}: bad JSON ({exc})") from exc
            try:
                rec = DocumentRecord(
                    id=str(obj["id"]),
                    title=str(obj["title"]),
                    label=str(obj["label"]),
                    row=int(obj["row"]),
                    text=obj.get("text"),
                )
            except KeyError as exc:
                raise TruncatedFile(f"{path}:{lineno}: missing key {exc}") from exc
            if rec.id in seen_ids:
                raise DuplicateId(f"{path}:{lineno}: duplicate id {rec.id!r}")
            if rec.row in seen_rows:
                raise RowOutOfRange(f"{path}:{lineno}: duplicate row {rec.row}")
            seen_ids.add(rec.id)
            seen_rows.add(rec.row)
            records.append(rec)
    if records and seen_rows != set(range(len(records))):
        raise RowOutOfRange(
            f"{path}: rows are not dense in [0, {len(records)})"
        )
    return records


def load_corpus(
    embedding_path: str | Path,
    catalog_path: str | Path,
    subset: int | None = None,
) -> Corpus:
    """Join catalog records with their embedding rows.

    subset=n keeps the first n records in catalog order; None keeps all.
    """
    embeddings = read_embeddings(embedding_path)
    records = read_catalog(catalog_path)
    for rec in records:
        if rec.row >= embeddings.shape[0]:
            raise RowOutOfRange(
                f"catalog row {rec.row} >= embedding count {embeddings.shape[0]}"
            )
    if subset is not None:
        records = records[: max(0, int(subset))]
    rows = [r.row for r in records]
    vectors = embeddings[rows] if rows else embeddings[:0]
    return Corpus(records=records, vectors=vectors)


# ---------------------------------------------------------------------------
# index snapshots


def _pack_body(meta: dict, arrays: list[tuple[str, np.ndarray]]) -> bytes:
    meta = dict(meta)
    meta["arrays"] = [
        [name, arr.dtype.str, list(arr.shape)] for name, arr in arrays
    ]
    meta_blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts = [struct.pack("<I", len(meta_blob)), meta_blob]
    parts.extend(np.ascontiguousarray(arr).tobytes() for _, arr in arrays)
    return b"".join(parts)


def _unpack_body(body: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    if len(body) < 4:
        raise TruncatedFile("snapshot body shorter than its meta header")
    (meta_len,) = struct.unpack("<I", body[:4])
    if len(body) < 4 + meta_len:
        raise TruncatedFile("snapshot body truncated inside meta")
    meta = json.loads(body[4 : 4 + meta_len].decode("utf-8"))
    offset = 4 + meta_len
    arrays: dict[str, np.ndarray] = {}
    for name, dtype, shape in meta.pop("arrays"):
        n_bytes = int(np.dtype(dtype).itemsize * int(np.prod(shape))) if shape else np.dtype(dtype).itemsize
        chunk = body[offset : offset + n_bytes]
        if len(chunk) != n_bytes:
            raise TruncatedFile(f"snapshot body truncated inside array {name!r}")
        arrays[name] = np.frombuffer(chunk, dtype=dtype).reshape(shape).copy()
        offset += n_bytes
    return meta, arrays


def _flat_body(index: FlatIndex) -> bytes:
    matrix = np.vstack([index.vector(i) for i in range(len(index))]) if len(index) else np.empty((0, index.dim))
    return _pack_body({"ids": index.ids}, [("vectors", matrix.astype("<f8"))])


def _restore_flat(dim: int, meta: dict, arrays: dict) -> FlatIndex:
    index = FlatIndex(dim=dim)
    index._ids = [i for i in meta["ids"]]
    index._id_set = set(index._ids)
    index._matrix = arrays["vectors"].astype(np.float64)
    index._rows = []
    index.frozen = True
    return index


def _ivf_body(index: IvfIndex) -> bytes:
    n = len(index)
    matrix = np.vstack([index.vector(i) for i in range(n)]) if n else np.empty((0, index.dim))
    cells = np.asarray([index.cell_of(i) for i in range(n)], dtype="<i4")
    assert index.centroids is not None
    return _pack_body(
        {"ids": index.ids, "nlist": index.nlist},
        [
            ("centroids", index.centroids.astype("<f8")),
            ("cells", cells),
            ("vectors", matrix.astype("<f8")),
        ],
    )


def _restore_ivf(dim: int, meta: dict, arrays: dict) -> IvfIndex:
    index = IvfIndex(dim=dim, nlist=int(meta["nlist"]))
    index.set_centroids(arrays["centroids"].astype(np.float64))
    index._ids = [i for i in meta["ids"]]
    index._id_set = set(index._ids)
    index._cells = [int(c) for c in arrays["cells"]]
    index._matrix = arrays["vectors"].astype(np.float64)
    index._rows = []
    cells = np.asarray(index._cells, dtype=np.int64)
    index._cell_members = [np.flatnonzero(cells == j) for j in range(index.nlist)]
    index.frozen = True
    return index


def _hnsw_body(index: HnswIndex) -> bytes:
    n = len(index)
    meta = {
        "ids": index.ids,
        "m": index.m,
        "ef_construction": index.ef_construction,
        "capacity": index.capacity,
        "seed": index.seed,
        "entry": index.entry_point,
        "max_level": index.max_level,
        "n_layers": len(index._adj),
    }
    arrays: list[tuple[str, np.ndarray]] = [
        ("vectors", index._vectors[:n].astype("<f8")),
        ("levels", index._levels[:n].astype("<i4")),
    ]
    for layer, (adj, deg) in enumerate(zip(index._adj, index._deg)):
        arrays.append((f"adj{layer}", adj[:n].astype("<i4")))
        arrays.append((f"deg{layer}", deg[:n].astype("<i4")))
    return _pack_body(meta, arrays)


def _restore_hnsw(dim: int, meta: dict, arrays: dict) -> HnswIndex:
    index = HnswIndex(
        capacity=int(meta["capacity"]),
        dim=dim,
        m=int(meta["m"]),
        ef_construction=int(meta["ef_construction"]),
        seed=int(meta["seed"]),
    )
    ids = [i for i in meta["ids"]]
    n = len(ids)
    index._n = n
    index._ids = ids
    index._id_set = set(ids)
    index._vectors[:n] = arrays["vectors"].astype(np.float64)
    index._levels[:n] = arrays["levels"]
    index._adj = []
    index._deg = []
    for layer in range(int(meta["n_layers"])):
        bound = index.degree_bound(layer)
        adj = np.full((index.capacity, bound), -1, dtype=np.int32)
        deg = np.zeros(index.capacity, dtype=np.int32)
        adj[:n] = arrays[f"adj{layer}"]
        deg[:n] = arrays[f"deg{layer}"]
        index._adj.append(adj)
        index._deg.append(deg)
    index._entry = int(meta["entry"])
    index._max_level = int(meta["max_level"])
    index.frozen = True
    return index


def save_index(path: str | Path, index: FlatIndex | IvfIndex | HnswIndex) -> None:
    """Snapshot a frozen index; round-trip restores identical search output."""
    if not index.frozen:
        raise IndexNotFrozen("freeze the index before snapshotting")
    if isinstance(index, FlatIndex):
        body = _flat_body(index)
    elif isinstance(index, IvfIndex):
        body = _ivf_body(index)
    elif isinstance(index, HnswIndex):
        body = _hnsw_body(index)
    else:
        raise TypeMismatch(f"cannot snapshot {type(index).__name__}")
    header = SNAP_MAGIC + struct.pack("<I", SNAP_VERSION)
    header += TYPE_TAGS[index.index_type]
    header += struct.pack("<IQ", index.dim, len(body))
    footer = struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    _atomic_write(path, header + body + footer)


def load_index(
    path: str | Path, expected_type: str | None = None
) -> FlatIndex | IvfIndex | HnswIndex:
    """Load a snapshot, verifying checksum and (optionally) index type."""
    blob = Path(path).read_bytes()
    if len(blob) < 24:
        raise TruncatedFile(f"{path}: shorter than the snapshot header")
    if blob[:4] != SNAP_MAGIC:
        raise BadMagic(f"{path}: magic {blob[:4]!r} != {SNAP_MAGIC!r}")
    (version,) = struct.unpack("<I", blob[4:8])
    if version != SNAP_VERSION:
        raise VersionUnsupported(f"{path}: version {version}")
    tag = blob[8:12]
    if tag not in TAG_TYPES:
        raise BadMagic(f"{path}: unknown index tag {tag!r}")
    index_type = TAG_TYPES[tag]
    if expected_type is not None and index_type != expected_type:
        raise TypeMismatch(f"{path}: snapshot holds {index_type!r}, expected {expected_type!r}")
    dim, body_len = struct.unpack("<IQ", blob[12:24])
    if len(blob) != 24 + body_len + 4:
        raise TruncatedFile(f"{path}: {len(blob)} bytes, header implies {24 + body_len + 4}")
    body = blob[24 : 24 + body_len]
    (crc,) = struct.unpack("<I", blob[24 + body_len :])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise ChecksumMismatch(f"{path}: body checksum mismatch")
    meta, arrays = _unpack_body(body)
    if index_type == "flat":
        return _restore_flat(dim, meta, arrays)
    if index_type == "ivf":
        return _restore_ivf(dim, meta, arrays)
    return _restore_hnsw(dim, meta, arrays)
