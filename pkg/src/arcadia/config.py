"""Flat key-value run configuration files.

Grammar, one setting per line:

    key = value

Keys are dotted lowercase identifiers (``core``, ``agent.alpha``,
``core.difficulty``).  Values run to the end of the line, surrounding
whitespace stripped; there is no quoting or escaping.  Blank lines and lines
starting with ``#`` are ignored.  Duplicate keys are an error, silent
last-wins behavior being the classic config trap.

Values stay strings here.  Each consumer coerces its own keys with the
helpers below so an error can name the key, the offending text, and what was
expected.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from .errors import ConfigurationError

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z][a-z0-9_]*)*$")

Settings = Dict[str, str]


def parse_settings(text: str, source: str = "<string>") -> Settings:
    settings: Settings = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not _KEY_RE.match(key):
            raise ConfigurationError(
                f"{source}:{lineno}: malformed key {key!r}"
                " (lowercase dotted identifiers only)"
            )
        if key in settings:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        settings[key] = value
    return settings


def load_settings(path: Union[str, Path]) -> Settings:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {p}: {exc}") from None
    return parse_settings(text, source=str(p))


def get_int(settings: Mapping[str, str], key: str, default: Optional[int] = None) -> int:
    if key not in settings:
        if default is None:
            raise ConfigurationError(f"missing required setting {key!r}")
        return default
    try:
        return int(settings[key])
    except ValueError:
        raise ConfigurationError(
            f"setting {key!r} must be an integer, got {settings[key]!r}"
        ) from None


def get_float(
    settings: Mapping[str, str], key: str, default: Optional[float] = None
) -> float:
    if key not in settings:
        if default is None:
            raise ConfigurationError(f"missing required setting {key!r}")
        return default
    try:
        return float(settings[key])
    except ValueError:
        raise ConfigurationError(
            f"setting {key!r} must be a number, got {settings[key]!r}"
        ) from None


def get_bool(
    settings: Mapping[str, str], key: str, default: Optional[bool] = None
) -> bool:
    if key not in settings:
        if default is None:
            raise ConfigurationError(f"missing required setting {key!r}")
        return default
    value = settings[key].lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ConfigurationError(
        f"setting {key!r} must be true or false, got {settings[key]!r}"
    )


def get_str(
    settings: Mapping[str, str], key: str, default: Optional[str] = None
) -> str:
    if key not in settings:
        if default is None:
            raise ConfigurationError(f"missing required setting {key!r}")
        return default
    return settings[key]
