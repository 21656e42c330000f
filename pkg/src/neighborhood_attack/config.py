"""Run configuration: JSON schema, validation and the typed view used by the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from .chain import ChainConfig
from .errors import ConfigError
from .exact import DEFAULT_CAP, MAX_CAP
from .graph import FAMILIES

_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(FAMILIES)},
                "n": _POS_INT,
                "dim": _POS_INT,
                "side": _POS_INT,
                "offsets": {"type": "array", "items": _POS_INT, "minItems": 1},
            },
        },
        "dims": {
            "type": "object",
            "required": ["r", "n"],
            "additionalProperties": False,
            "properties": {"r": _POS_INT, "r_star": _POS_INT, "n": _POS_INT},
        },
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                "replicas": _POS_INT,
                "burn_in_steps": {"type": ["integer", "null"], "minimum": 0},
                "thinning": {"type": ["integer", "null"], "minimum": 1},
                "samples": {"type": "integer", "minimum": 0},
            },
        },
        "exact": {"type": "boolean"},
        "fkg": {"type": "boolean"},
        "fkg_limit": {"type": "integer", "minimum": 0},
        "distances": {"type": "boolean"},
        "simulate": {"type": "boolean"},
        "dump_pi": {"type": "boolean"},
        "sizes": {"type": "array", "items": _POS_INT, "minItems": 1},
        "cap": {"type": "integer", "minimum": 1, "maximum": MAX_CAP},
        "out": {"type": "string"},
    },
}


@dataclass
class RunConfig:
    family: Optional[dict] = None
    dims: Optional[dict] = None  # explicit (r, r_star, n) for the bound command
    chain: ChainConfig = field(default_factory=ChainConfig)
    exact: bool = False
    fkg: bool = False
    fkg_limit: int = 100
    distances: bool = True
    simulate: bool = False  # sweep only: also run the chain per size
    dump_pi: bool = False
    sizes: Optional[list] = None
    cap: int = DEFAULT_CAP
    out: str = "runs/latest"

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        raw = dict(raw)
        chain = ChainConfig(**raw.pop("chain", {}))
        return cls(chain=chain, **raw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(raw)

    def family_params(self) -> dict:
        if self.family is None:
            raise ConfigError("config has no 'family'")
        return {k: v for k, v in self.family.items() if k != "kind"}

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: v for k, v in out.items() if v is not None}
