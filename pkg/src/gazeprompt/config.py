"""Configuration loading and precedence: CLI flag > config file > default.

The config file is YAML (or JSON) with optional sections ``ingest``,
``render``, and ``endpoint`` whose keys mirror the matching dataclasses.
Every command echoes its fully resolved settings to the output directory
for provenance.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import Any, Mapping, TypeVar

import yaml

T = TypeVar("T")


def load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path!r} must contain a mapping at the top level")
    return data


def section(config: Mapping[str, Any], name: str) -> dict:
    value = config.get(name, {})
    if not isinstance(value, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    return dict(value)


def build_dataclass(cls: type[T], file_section: Mapping[str, Any], overrides: Mapping[str, Any]) -> T:
    """Construct ``cls`` from defaults, then the file section, then non-None overrides."""
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(file_section) - known
    if unknown:
        raise ValueError(
            f"unknown {cls.__name__} settings in config file: {', '.join(sorted(unknown))}"
        )
    merged: dict[str, Any] = dict(file_section)
    merged.update({k: v for k, v in overrides.items() if v is not None and k in known})
    return cls(**merged)


def echo_resolved(out_dir: str, settings: Mapping[str, Any]) -> str:
    """Write resolved_config.json into the output directory; returns its path."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "resolved_config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(settings, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path
