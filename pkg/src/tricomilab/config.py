"""Experiment configuration: a versioned JSON document that round-trips
losslessly, rejects unknown keys (with pointer paths), and drives the CLI.
The seed controls only the random sample points of the verification suites.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Validation failure carrying a JSON-pointer-style path."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


@dataclass
class GridConfig:
    N: int = 64
    L: float = 8.0


@dataclass
class DataConfig:
    kind: str = "a3"
    values: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0])
    r_flat: float = 1.0
    r_zero: float = 2.0


@dataclass
class RhsConfig:
    name: str = "zero"
    expression: str | None = None
    strength: float = 1.0


@dataclass
class ExperimentConfig:
    version: int = SCHEMA_VERSION
    m: int = 1
    n: int = 2
    T: float = 1.0
    grid: GridConfig = field(default_factory=GridConfig)
    data: DataConfig = field(default_factory=DataConfig)
    rhs: RhsConfig = field(default_factory=RhsConfig)
    suites: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: dict, pointer: str = "config") -> "ExperimentConfig":
        known = {
            "version": int, "m": int, "n": int, "T": (int, float),
            "grid": dict, "data": dict, "rhs": dict, "suites": list,
            "tolerances": dict, "out": str, "seed": int,
        }
        _reject_unknown(raw, known, pointer)
        cfg = cls()
        for key in ("version", "m", "n", "seed"):
            if key in raw:
                setattr(cfg, key, _typed(raw, key, int, pointer))
        if "T" in raw:
            cfg.T = float(_typed(raw, "T", (int, float), pointer))
        if "out" in raw:
            cfg.out = _typed(raw, "out", str, pointer)
        if "suites" in raw:
            cfg.suites = list(_typed(raw, "suites", list, pointer))
        if "tolerances" in raw:
            cfg.tolerances = dict(_typed(raw, "tolerances", dict, pointer))
        if "grid" in raw:
            sub = raw["grid"]
            _reject_unknown(sub, {"N": int, "L": (int, float)}, f"{pointer}.grid")
            cfg.grid = GridConfig(N=int(sub.get("N", 64)),
                                  L=float(sub.get("L", 8.0)))
        if "data" in raw:
            sub = raw["data"]
            _reject_unknown(sub, {"kind": str, "values": list,
                                  "r_flat": (int, float), "r_zero": (int, float)},
                            f"{pointer}.data")
            cfg.data = DataConfig(
                kind=sub.get("kind", "a3"),
                values=[float(v) for v in sub.get("values", [1, 2, 3, 4])],
                r_flat=float(sub.get("r_flat", 1.0)),
                r_zero=float(sub.get("r_zero", 2.0)))
        if "rhs" in raw:
            sub = raw["rhs"]
            _reject_unknown(sub, {"name": str, "expression": (str, type(None)),
                                  "strength": (int, float)}, f"{pointer}.rhs")
            cfg.rhs = RhsConfig(name=sub.get("name", "zero"),
                                expression=sub.get("expression"),
                                strength=float(sub.get("strength", 1.0)))
        cfg.validate(pointer)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def validate(self, pointer: str = "config") -> None:
        if self.version != SCHEMA_VERSION:
            raise ConfigError(f"{pointer}.version",
                              f"expected schema version {SCHEMA_VERSION}")
        if self.m < 1:
            raise ConfigError(f"{pointer}.m", "m must be a positive integer")
        if self.n not in (1, 2, 3):
            raise ConfigError(f"{pointer}.n", "n must be 1, 2 or 3")
        if self.T <= 0:
            raise ConfigError(f"{pointer}.T", "T must be positive")
        if self.grid.N < 4 or self.grid.N & (self.grid.N - 1):
            raise ConfigError(f"{pointer}.grid.N", "N must be a power of two >= 4")
        if self.data.kind not in ("a1", "a2", "a3"):
            raise ConfigError(f"{pointer}.data.kind", "kind must be a1|a2|a3")
        if self.rhs.name not in ("zero", "cubic", "source", "custom-expression"):
            raise ConfigError(f"{pointer}.rhs.name", "unknown rhs name")


def _reject_unknown(raw: dict, known: dict, pointer: str) -> None:
    if not isinstance(raw, dict):
        raise ConfigError(pointer, "expected an object")
    for key in raw:
        if key not in known:
            raise ConfigError(f"{pointer}.{key}", "unknown key")


def _typed(raw, key, types, pointer):
    val = raw[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise ConfigError(f"{pointer}.{key}", f"expected {types}")
    return val
