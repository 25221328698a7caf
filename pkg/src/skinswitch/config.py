"""Config documents for experiments and one-shot runs.

A config file is TOML with sections [model], [geometry], [boundary],
[dynamics], [output]; experiments add their own keys under [sweep] and
[analysis]. Every key has a typed default; unknown sections or keys are
errors. Dotted-key overrides ("geometry.L_x=30") are applied after file
parsing and recorded so the resolved config in the manifest reflects them.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "Field", "resolve_config", "parse_override",
           "load_toml"]


class ConfigError(ValueError):
    """Malformed config document, unknown key, or type mismatch."""


@dataclass(frozen=True)
class Field:
    """One config key: default value, provenance tag, and doc line.

    provenance "cited" marks a value quoted from the reference results this
    package reproduces; "chosen" marks a documented default those results
    leave open.
    """

    default: Any
    provenance: str = "chosen"
    doc: str = ""

    def coerce(self, value: Any, path: str) -> Any:
        want = type(self.default)
        if self.default is None or isinstance(value, want):
            return value
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        if want is list and isinstance(value, (list, tuple)):
            return list(value)
        raise ConfigError(
            f"config key {path} expects {want.__name__}, got "
            f"{type(value).__name__} ({value!r})")


def load_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")


def parse_override(text: str) -> tuple[list[str], Any]:
    """Parse "section.key=value" with the value read as a TOML literal."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    key, _, raw = text.partition("=")
    parts = [p.strip() for p in key.strip().split(".")]
    if len(parts) < 2 or not all(parts):
        raise ConfigError(f"override key {key!r} must be section.key")
    raw = raw.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw   # bare word: treat as string
    return parts, value


def resolve_config(schema: dict[str, dict[str, Field]],
                   file_data: dict | None = None,
                   overrides: list[str] | tuple[str, ...] = ()) -> tuple[dict, dict]:
    """Merge defaults <- config file <- dotted overrides.

    Returns (resolved nested dict, provenance map section.key ->
    "cited" | "chosen" | "file" | "override").
    """
    resolved: dict[str, dict[str, Any]] = {}
    provenance: dict[str, str] = {}
    for sec, fields in schema.items():
        resolved[sec] = {}
        for key, f in fields.items():
            resolved[sec][key] = copy.deepcopy(f.default)
            provenance[f"{sec}.{key}"] = f.provenance

    def apply(sec: str, key: str, value: Any, source: str) -> None:
        if sec not in schema:
            raise ConfigError(f"unknown config section [{sec}]")
        if key not in schema[sec]:
            known = ", ".join(sorted(schema[sec]))
            raise ConfigError(
                f"unknown key {key!r} in section [{sec}] (known: {known})")
        resolved[sec][key] = schema[sec][key].coerce(value, f"{sec}.{key}")
        provenance[f"{sec}.{key}"] = source

    if file_data:
        for sec, body in file_data.items():
            if not isinstance(body, dict):
                raise ConfigError(f"top-level key {sec!r} must be a section")
            for key, value in body.items():
                apply(sec, key, value, "file")
    for text in overrides:
        parts, value = parse_override(text)
        if len(parts) != 2:
            raise ConfigError(f"override key {'.'.join(parts)!r} must be section.key")
        apply(parts[0], parts[1], value, "override")
    return resolved, provenance
