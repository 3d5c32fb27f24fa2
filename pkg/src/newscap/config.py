"""Flat key=value config files for reproducible runs.

Format: one ``key = value`` pair per line, ``#`` comments and blank lines
ignored. Values stay strings here; each consumer coerces what it needs.
Command-line flags always override file values.
"""

from __future__ import annotations

from pathlib import Path

from .errors import InputFileError, SchemaError


def load_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise SchemaError(f"config line {line_no} is not 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


_INT_KEYS = {"seed", "jobs", "budget", "cap", "origin_budget", "neg_per_group"}
_FLOAT_KEYS = {"timeout", "meteor"}


def coerce(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "weights":
            parts = [float(p) for p in value.split(",")]
            if len(parts) != 3:
                raise ValueError("expected three comma-separated weights")
            return tuple(parts)
    except ValueError as exc:
        raise SchemaError(f"bad config value for {key!r}: {exc}") from None
    return value
