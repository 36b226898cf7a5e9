"""Run configuration shared by the command-line tools."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .series import DEFAULT_MAX_TERMS
from .solver import GridSpec

__all__ = ["GridConfig", "RunConfig", "parse_grid", "load_config"]


@dataclass(frozen=True)
class GridConfig:
    min: float = 0.6
    max: float = 6.0
    count: int = 10
    spacing: str = "linear"

    def __post_init__(self):
        # GridSpec performs the validation
        self.spec()

    def spec(self) -> GridSpec:
        return GridSpec(float(self.min), float(self.max), int(self.count), self.spacing)


@dataclass(frozen=True)
class RunConfig:
    A: float = 0.75
    tolerance: float = 1e-6
    max_terms: int = DEFAULT_MAX_TERMS
    grid: GridConfig = field(default_factory=GridConfig)
    output_format: str = "csv"
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be csv or json")

    def to_dict(self) -> dict:
        return asdict(self)


def parse_grid(text: str) -> GridConfig:
    """'min:max:count' or 'min:max:count:log'."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(f"grid must be min:max:count[:log], got {text!r}")
    spacing = "linear"
    if len(parts) == 4:
        if parts[3] not in ("log", "linear"):
            raise ValueError(f"unknown grid spacing {parts[3]!r}")
        spacing = parts[3]
    return GridConfig(float(parts[0]), float(parts[1]), int(parts[2]), spacing)


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then non-None ``overrides``."""
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(data) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    grid = data.pop("grid", None)
    cfg = RunConfig(**data)
    if grid is not None:
        cfg = replace(cfg, grid=GridConfig(**grid) if isinstance(grid, dict) else parse_grid(grid))
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **clean) if clean else cfg
