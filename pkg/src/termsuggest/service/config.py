"""Service configuration: a flat UTF-8 key-value file.

Relative paths resolve against the config file's directory, so a config can
travel with its data. ``TERMSUGGEST_LISTEN`` and ``TERMSUGGEST_LOG``
environment variables override the listen address and log path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..analytics import ServiceType


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    active_service: ServiceType = ServiceType.CTS
    ts_limit: int = 10
    alt_limit: int = 5
    cts_threshold: int = 3
    ust_vocabulary: Path | None = None
    thesaurus: Path | None = None
    concordance: Path | None = None
    corpus: Path | None = None
    association_table: Path | None = None
    log_path: Path = Path("events.log")
    listen: str = "127.0.0.1:8080"

    def __post_init__(self):
        if self.ts_limit < 1 or self.alt_limit < 1:
            raise ConfigError("suggestion limits must be >= 1")
        if self.cts_threshold < 1:
            raise ConfigError("cts_threshold must be >= 1")

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen.rsplit(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError(f"listen address needs host:port, got {self.listen!r}")


_PATH_KEYS = (
    "ust_vocabulary",
    "thesaurus",
    "concordance",
    "corpus",
    "association_table",
    "log_path",
)
_INT_KEYS = ("ts_limit", "alt_limit", "cts_threshold")


def load_config(path: str | Path) -> ServiceConfig:
    """Parse a ``key = value`` config file into a :class:`ServiceConfig`."""
    path = Path(path)
    base = path.parent
    values: dict = {}
    known = {f.name for f in fields(ServiceConfig)}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in known:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            if key == "active_service":
                try:
                    values[key] = ServiceType(raw.upper())
                except ValueError:
                    raise ConfigError(
                        f"{path}:{line_no}: unknown service {raw!r}"
                    ) from None
            elif key in _INT_KEYS:
                try:
                    values[key] = int(raw)
                except ValueError:
                    raise ConfigError(
                        f"{path}:{line_no}: {key} must be an integer"
                    ) from None
            elif key in _PATH_KEYS:
                raw_path = Path(raw)
                values[key] = raw_path if raw_path.is_absolute() else base / raw_path
            else:
                values[key] = raw
    config = ServiceConfig(**values)
    if listen := os.environ.get("TERMSUGGEST_LISTEN"):
        config.listen = listen
    if log_path := os.environ.get("TERMSUGGEST_LOG"):
        config.log_path = Path(log_path)
    return config


def emit_config(config: ServiceConfig) -> str:
    """Render a config back to its file form; reloading the result is
    value-identical."""
    lines = [f"active_service = {config.active_service.value}"]
    for key in _INT_KEYS:
        lines.append(f"{key} = {getattr(config, key)}")
    for key in _PATH_KEYS:
        value = getattr(config, key)
        if value is not None:
            lines.append(f"{key} = {value}")
    lines.append(f"listen = {config.listen}")
    return "\n".join(lines) + "\n"
