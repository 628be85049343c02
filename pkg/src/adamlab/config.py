"""Experiment-config loading with strict schema validation.

Configs are single YAML documents (key/value with nesting).  Unknown keys
are rejected and missing required keys are reported by name, so a run is
fully specified by the file plus command-line flags; no environment
variables are consulted.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

import yaml


class ConfigError(ValueError):
    """The config document does not match the command's schema."""


@dataclasses.dataclass(frozen=True)
class Field:
    types: tuple
    required: bool = False
    default: Any = None
    choices: tuple | None = None
    schema: dict | None = None


def _type_ok(value, types) -> bool:
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return True
    if isinstance(value, bool) and bool not in types:
        return False
    return isinstance(value, types)


def validate(doc, schema: dict[str, Field], path: str = "") -> dict:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping")
    unknown = set(doc) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s) at {path or 'top level'}: {sorted(unknown)}")
    out = {}
    for key, field in schema.items():
        where = f"{path}.{key}" if path else key
        if key not in doc or doc[key] is None:
            if field.required:
                raise ConfigError(f"missing required field: {where}")
            out[key] = field.default
            continue
        value = doc[key]
        if field.schema is not None:
            out[key] = validate(value, field.schema, where)
            continue
        if not _type_ok(value, field.types):
            names = "/".join(t.__name__ for t in field.types)
            raise ConfigError(f"{where} must be {names}, got {type(value).__name__}")
        if field.choices is not None and value not in field.choices:
            raise ConfigError(f"{where} must be one of {field.choices}, got {value!r}")
        out[key] = value
    return out


def load_config(path, schema: dict[str, Field]) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from None
    return validate(doc, schema)


ORACLE_SCHEMA = {
    "name": Field((str,), required=True),
    "params": Field((dict,), default={}),
}

_COMMON_STUDY = {
    "oracle": Field((dict,), required=True, schema=ORACLE_SCHEMA),
    "zeta": Field((float,), default=1.0),
    "seeds": Field((int,), required=True),
    "x0": Field((float, list), default=None),
    "max_steps": Field((int,), default=None),
}

RUN_SCHEMA = {
    **_COMMON_STUDY,
    "optimizer": Field((str,), required=True, choices=("rmsprop", "adam")),
    "beta1": Field((float,), default=0.0),
    "eps": Field((float,), required=True),
    "eta": Field((float,), default=None),
    "curve_points": Field((int,), default=400),
}

SCALE_SCHEMA = {
    **_COMMON_STUDY,
    "optimizer": Field((str,), required=True, choices=("rmsprop", "adam")),
    "beta1": Field((float,), default=0.0),
    "eps_list": Field((list,), required=True),
    "max_steps": Field((int,), default=400_000),
}

PARITY_SCHEMA = {
    "oracle": Field((dict,), required=True, schema=ORACLE_SCHEMA),
    "eta": Field((float,), required=True),
    "beta1": Field((float,), required=True),
    "beta2": Field((float,), required=True),
    "lam": Field((float,), required=True),
    "steps": Field((int,), required=True),
    "seeds": Field((int,), required=True),
    "x0": Field((float, list), default=None),
}

SMOOTHNESS_SCHEMA = {
    "oracle": Field((dict,), required=True, schema=ORACLE_SCHEMA),
    "steps": Field((int,), default=200),
    "eta": Field((float,), default=0.02),
    "beta1": Field((float,), default=0.0),
    "beta2": Field((float,), default=0.9),
    "zeta": Field((float,), default=1e-8),
    "x0": Field((float, list), default=1.0),
    "gammas": Field((list,), default=[0.125, 0.25, 0.5, 1.0]),
    "pool_gammas": Field((bool,), default=False),
}

NOISE_SCHEMA = {
    "oracle": Field((dict,), required=True, schema=ORACLE_SCHEMA),
    "points": Field((list,), required=True),
    "n_samples": Field((int,), default=10_000),
    "pooled": Field((bool,), default=False),
}

VERIFY_SCHEMA = {
    "cases": Field((int,), default=10_000),
    "t_max": Field((int,), default=512),
    "c_max": Field((float,), default=10.0),
    "trajectories": Field((int,), default=16),
}
