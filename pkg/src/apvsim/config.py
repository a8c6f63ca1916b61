"""YAML document loading and field-level validation shared by all file formats."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import yaml

SCHEMA_VERSION = 1


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads exponent floats without a dot or sign (``2e6``, ``2.0e6``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                |[0-9][0-9_]*[eE][-+]?[0-9]+
                |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                |[-+]?\.(?:inf|Inf|INF)
                |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    """Invalid input document; carries the offending source and field."""

    def __init__(self, message: str, *, source: str | None = None, field: str | None = None):
        self.source = source
        self.field = field
        where = ":".join(p for p in (source, field) if p)
        super().__init__(f"{where}: {message}" if where else message)


def data_path(*parts: str) -> Path:
    """Path to a file shipped in apvsim/data."""
    return Path(str(resources.files("apvsim"))).joinpath("data", *parts)


def load_document(path: str | Path, kind: str) -> dict:
    path = Path(path)
    src = str(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {kind} file ({exc.strerror})", source=src) from exc
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"malformed YAML{line}", source=src) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{kind} file must be a mapping", source=src)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"expected schema_version {SCHEMA_VERSION}, got {version!r}",
            source=src,
            field="schema_version",
        )
    return doc


def check_keys(doc: dict, allowed: Iterable[str], required: Iterable[str] = (), *,
               source: str | None = None, prefix: str = "") -> None:
    allowed = set(allowed)
    for key in doc:
        if key not in allowed:
            raise ConfigError("unknown field", source=source, field=prefix + str(key))
    for key in required:
        if key not in doc:
            raise ConfigError("missing required field", source=source, field=prefix + key)


def get_number(doc: dict, key: str, *, source: str | None = None, prefix: str = "",
               default: Any = None, positive: bool = False, nonneg: bool = False) -> float:
    value = doc.get(key, default)
    if value is None:
        raise ConfigError("missing required field", source=source, field=prefix + key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", source=source, field=prefix + key)
    value = float(value)
    if positive and not value > 0:
        raise ConfigError("must be > 0", source=source, field=prefix + key)
    if nonneg and not value >= 0:
        raise ConfigError("must be >= 0", source=source, field=prefix + key)
    return value


def resolve_relative(base: str | Path, ref: str) -> Path:
    """Resolve ``ref`` against the directory of ``base``; ``pkg:`` refers to shipped data."""
    if ref.startswith("pkg:"):
        return data_path(*ref[4:].split("/"))
    p = Path(ref)
    return p if p.is_absolute() else Path(base).parent / p
