"""Experiment configuration: one JSON file per experiment, overridable from the command line."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .heuristics import TABLE_ORDER, parse_heuristic
from .reenact import DEFAULT_PERCENTS

OUTPUT_ENV = "IIASIM_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "iiasim-out")


@dataclass
class ExperimentConfig:
    graph: Path
    commits: Path
    interval: tuple[str, str]
    corpus: Path
    requests: Path
    heuristics: list[str] = field(default_factory=lambda: [h.value for h in TABLE_ORDER])
    percents: list[float] = field(default_factory=lambda: list(DEFAULT_PERCENTS))
    lsi_rank: int | None = None
    lsi_seed: int = 0
    rnd_seed: int = 0
    output_dir: Path = field(default_factory=lambda: Path(default_output_dir()))
    jobs: int | None = None  # None: all available cores
    vectors: Path | None = None  # LSI cache file
    path_mapping: Path | None = None  # committed file path -> class id overrides

    _PATHS = ("graph", "commits", "corpus", "requests", "output_dir", "vectors", "path_mapping")

    def __post_init__(self):
        for name in self._PATHS:
            v = getattr(self, name)
            if v is not None and not isinstance(v, Path):
                setattr(self, name, Path(v))
        self.heuristics = [parse_heuristic(h).value for h in self.heuristics]
        if not self.heuristics:
            raise ConfigError("no heuristics selected")
        if len(set(self.heuristics)) != len(self.heuristics):
            raise ConfigError("duplicate heuristic in list")
        self.percents = sorted({float(p) for p in self.percents})
        if not self.percents or any(p <= 0 for p in self.percents):
            raise ConfigError("percent values must be positive")
        if len(self.interval) != 2:
            raise ConfigError("interval must be [start, end]")
        self.interval = (str(self.interval[0]), str(self.interval[1]))
        if self.lsi_rank is not None and self.lsi_rank < 1:
            raise ConfigError("lsi_rank must be positive")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be positive")

    @classmethod
    def load(cls, path: str | Path, **overrides) -> ExperimentConfig:
        """Read a config file; relative paths resolve against the file's directory."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {unknown}")
        for name in cls._PATHS:
            v = data.get(name)
            if v is not None and not Path(v).is_absolute():
                data[name] = path.parent / v
        data.update({k: v for k, v in overrides.items() if v is not None})
        data.setdefault("output_dir", default_output_dir())
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def check_files(self) -> None:
        for name in ("graph", "commits", "corpus", "requests", "path_mapping"):
            p = getattr(self, name)
            if p is not None and not p.is_file():
                raise ConfigError(f"{name} file not found: {p}")

    def to_json(self) -> str:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Path):
                d[k] = str(v)
        d["interval"] = list(self.interval)
        return json.dumps(d, indent=2, sort_keys=True)
