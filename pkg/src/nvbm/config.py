"""Settings, memory-map configuration and YAML loaders."""

import logging
import re
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.console import Console
from rich.logging import RichHandler

from nvbm.errors import ConfigSyntaxError
from nvbm.models.pydantic_models import MapConfig, ModelMetadata, SyntheticTraceSpec

_KV_RE = re.compile(r"([A-Za-z_][\w.]*)\s*=\s*(\S+)")
_INT_RE = re.compile(r"0[xX][0-9a-fA-F]+|[0-9]+")

_MAP_KEYS = frozenset({"nvdla_start", "nvdla_end", "dram_start", "dram_end", "csb_stride", "program_words"})
_TOP_KEYS = frozenset({"result_addr", "rebase_from", "rebase_to", "rebase_window"})


class LogLevel(str, Enum):
    OFF = "off"
    INFO = "info"
    DEBUG = "debug"


class Settings(BaseSettings):
    """Process settings read from ``NVBM_*`` environment variables."""

    log: LogLevel = LogLevel.OFF

    model_config = SettingsConfigDict(env_prefix="NVBM_")


def configure_logging(level: LogLevel, console: Console | None = None) -> None:
    """Route package diagnostics to stderr through rich.

    Args:
        level: ``off`` silences everything.
        console: Console to log to; a stderr console by default.
    """
    root = logging.getLogger("nvbm")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    if level is LogLevel.OFF:
        root.setLevel(logging.CRITICAL + 1)
        return
    handler = RichHandler(console=console or Console(stderr=True), show_path=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if level is LogLevel.DEBUG else logging.INFO)
    root.propagate = False


def _parse_int(text: str, line_no: int) -> int:
    if _INT_RE.fullmatch(text) is None:
        raise ConfigSyntaxError(line_no, f"{text!r} is not an integer")
    return int(text, 16) if text[:2].lower() == "0x" else int(text)


def parse_map_config(text: str) -> MapConfig:
    """Parse ``key = value`` memory-map text.

    Keys: nvdla_start, nvdla_end, dram_start, dram_end, csb_stride,
    program_words, result_addr, rebase_from, rebase_to, rebase_window and
    ``mask.0x<addr> = 0x<mask>`` read-mask overrides.

    Raises:
        ConfigSyntaxError: Malformed line, unknown or repeated key, or values
            that do not form a valid map.
    """
    map_fields: dict[str, int] = {}
    top: dict[str, int] = {}
    masks: dict[int, int] = {}
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _KV_RE.fullmatch(line)
        if match is None:
            raise ConfigSyntaxError(line_no, f"expected key = value, got {line!r}")
        key, value_text = match.groups()
        if key in seen:
            raise ConfigSyntaxError(line_no, f"duplicate key {key!r}")
        seen.add(key)
        value = _parse_int(value_text, line_no)
        if key in _MAP_KEYS:
            map_fields[key] = value
        elif key in _TOP_KEYS:
            top[key] = value
        elif key.startswith("mask."):
            masks[_parse_int(key[len("mask.") :], line_no)] = value
        else:
            raise ConfigSyntaxError(line_no, f"unknown key {key!r}")

    try:
        return MapConfig.model_validate({"memory_map": map_fields, "masks": masks, **top})
    except ValidationError as e:
        raise ConfigSyntaxError(None, f"invalid memory map: {e.errors()[0]['msg']}") from e


def load_map_config(path: Path | None = None) -> MapConfig:
    """Load a memory-map file; None gives the default map.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        ConfigSyntaxError: If the content does not parse.
    """
    if path is None:
        return MapConfig()
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    return parse_map_config(path.read_text())


def _load_raw_yaml(path: Path) -> dict[str, Any]:
    """Load a YAML mapping; an empty file is an empty mapping.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        yaml.YAMLError: If YAML parsing fails.
    """
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    with open(path) as f:
        raw_config: dict[str, Any] | None = yaml.safe_load(f)

    return raw_config if raw_config is not None else {}


def load_trace_spec(path: Path) -> SyntheticTraceSpec:
    """Load a synthetic trace recipe from YAML.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        ValidationError: If the recipe doesn't match the schema.
    """
    return SyntheticTraceSpec.model_validate(_load_raw_yaml(path))


def load_model_metadata(path: Path, name: str | None = None) -> ModelMetadata:
    """Load model metadata from YAML.

    The file holds either one model mapping or a ``models:`` list; with a
    list, ``name`` picks the entry (the first one if None).

    Raises:
        FileNotFoundError: If the file doesn't exist.
        KeyError: If ``name`` is not in the list.
        ValidationError: If an entry doesn't match the schema.
    """
    raw_config = _load_raw_yaml(path)
    entries: list[dict[str, Any]] = raw_config.get("models", [raw_config])
    if name is None:
        return ModelMetadata.model_validate(entries[0])
    for entry in entries:
        if entry.get("name") == name:
            return ModelMetadata.model_validate(entry)
    raise KeyError(f"model {name!r} not found in {path}")
