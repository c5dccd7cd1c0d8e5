"""Run configuration: a strict JSON schema with explicit defaults.

Unknown keys are rejected at every nesting level so typos fail fast
instead of silently falling back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_INDEX_KEYS = {"type", "dim", "M", "ef_construction", "ef_search", "nlist", "nprobe"}
_SEARCH_KEYS = {"k", "threshold"}
_GRID_KEYS = {"dims", "thresholds", "models", "index_types"}
_TOP_KEYS = {
    "embedding_path",
    "catalog_path",
    "subset",
    "index",
    "search",
    "grid",
    "objective",
    "seed",
    "embedder_url",
}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


@dataclass
class IndexConfig:
    # nprobe=None defers to the engine default (10, capped at nlist)
    type: str = "flat"
    dim: int | None = None
    M: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    nlist: int | None = None
    nprobe: int | None = None


@dataclass
class SearchConfig:
    k: int = 10
    threshold: float = -1.0


@dataclass
class GridConfig:
    dims: list[int] = field(default_factory=lambda: [256, 512, 1024])
    thresholds: list[float] = field(default_factory=lambda: [0.7, 0.8, 0.9])
    models: list[str] = field(default_factory=lambda: ["default"])
    index_types: list[str] = field(default_factory=lambda: ["flat"])


@dataclass
class RunConfig:
    embedding_path: str
    catalog_path: str
    subset: int | None = None
    index: IndexConfig = field(default_factory=IndexConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    objective: str = "max_precision"
    seed: int = 42
    embedder_url: str | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError(f"config root must be an object, got {type(obj).__name__}")
        _reject_unknown(obj, _TOP_KEYS, "config")
        for required in ("embedding_path", "catalog_path"):
            if required not in obj:
                raise ConfigError(f"missing required key {required!r}")
        index_obj = obj.get("index", {})
        search_obj = obj.get("search", {})
        grid_obj = obj.get("grid", {})
        for sub, allowed, name in (
            (index_obj, _INDEX_KEYS, "index"),
            (search_obj, _SEARCH_KEYS, "search"),
            (grid_obj, _GRID_KEYS, "grid"),
        ):
            if not isinstance(sub, dict):
                raise ConfigError(f"{name} must be an object")
            _reject_unknown(sub, allowed, name)
        try:
            cfg = cls(
                embedding_path=str(obj["embedding_path"]),
                catalog_path=str(obj["catalog_path"]),
                subset=None if obj.get("subset") is None else int(obj["subset"]),
                index=IndexConfig(**index_obj),
                search=SearchConfig(**search_obj),
                grid=GridConfig(**grid_obj),
                objective=str(obj.get("objective", "max_precision")),
                seed=int(obj.get("seed", 42)),
                embedder_url=obj.get("embedder_url"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        if cfg.index.type not in ("flat", "ivf", "hnsw", "hybrid"):
            raise ConfigError(f"index.type must be flat/ivf/hnsw/hybrid, got {cfg.index.type!r}")
        if cfg.objective not in ("max_precision", "precision_per_time"):
            raise ConfigError(f"objective must be max_precision or precision_per_time")
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(obj)

    def embedding_path_for(self, model: str) -> str:
        """Resolve the embedding file for a model name.

        A ``{model}`` placeholder in embedding_path selects per-model
        files; without a placeholder every model maps to the same file.
        """
        if "{model}" in self.embedding_path:
            return self.embedding_path.replace("{model}", model)
        return self.embedding_path
