"""Run configuration: INI config file < ``OCCOV_*`` environment variables < command-line flags.

Config file layout (every section and key optional)::

    [run]
    iris_dir = exports/unibo
    mapping = exports/unibo/type_mapping.csv
    meta_dump = dumps/meta
    index_dump = dumps/index
    out = results/unibo
    year_cutoff = 2024
    shards = 4
    emit_citation_detail = false

    [iris.files]            ; table name -> file name
    master = ODS_L1_IR_ITEM_MASTER_ALL.csv

    [iris.columns.master]   ; canonical column -> column in the file
    DATE_ISSUED_YEAR = ANNO

    [meta.columns]          ; id, title, pub_date, type
    id = id

    [index.columns]         ; oci, citing, cited
    oci = id
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .iris_ingest import TABLE_NAMES

ENV_PREFIX = "OCCOV_"
PATH_KEYS = ("iris_dir", "mapping", "meta_dump", "index_dump", "out")


class ConfigInvalid(ValueError):
    pass


@dataclass
class RunConfig:
    iris_dir: Path | None = None
    mapping: Path | None = None
    meta_dump: Path | None = None
    index_dump: Path | None = None
    out: Path | None = None
    year_cutoff: int = 2024
    shards: int = 1
    emit_citation_detail: bool = False
    force: bool = False
    iris_files: dict[str, str] = field(default_factory=dict)
    iris_columns: dict[str, dict[str, str]] = field(default_factory=dict)
    meta_columns: dict[str, str] = field(default_factory=dict)
    index_columns: dict[str, str] = field(default_factory=dict)

    def validate(self, needs: tuple[str, ...]) -> None:
        if not 1000 <= self.year_cutoff <= 2100:
            raise ConfigInvalid(f"year cutoff must be within [1000, 2100], got {self.year_cutoff}")
        if self.shards < 1:
            raise ConfigInvalid(f"shard count must be >= 1, got {self.shards}")
        if self.out is None:
            raise ConfigInvalid("an output directory is required (--out)")
        unknown = set(self.iris_files) - set(TABLE_NAMES)
        if unknown:
            raise ConfigInvalid(f"unknown IRIS table name(s) in config: {sorted(unknown)}")
        for key in needs:
            value = getattr(self, key)
            if value is None:
                raise ConfigInvalid(f"missing required setting --{key.replace('_', '-')}")
            if key == "iris_dir" and not value.is_dir():
                raise ConfigInvalid(f"IRIS directory not found: {value}")
            if key == "mapping" and not value.is_file():
                raise ConfigInvalid(f"type mapping file not found: {value}")
            if key in ("meta_dump", "index_dump") and not value.exists():
                raise ConfigInvalid(f"dump not found: {value}")


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ConfigInvalid(f"not a boolean: {text!r}")


def _to_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigInvalid(f"{key} must be an integer, got {text!r}") from None


def _apply(cfg: RunConfig, key: str, value: str) -> None:
    if key in PATH_KEYS:
        setattr(cfg, key, Path(value))
    elif key in ("year_cutoff", "shards"):
        setattr(cfg, key, _to_int(key, value))
    elif key in ("emit_citation_detail", "force"):
        setattr(cfg, key, _to_bool(value))
    else:
        raise ConfigInvalid(f"unknown setting {key!r}")


def load_config_file(path: Path, cfg: RunConfig) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # column names are case-sensitive
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    base = path.parent
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "run":
            for key, value in items.items():
                _apply(cfg, key, value)
                if key in PATH_KEYS:
                    setattr(cfg, key, base / value)
        elif section == "iris.files":
            cfg.iris_files.update(items)
        elif section.startswith("iris.columns."):
            cfg.iris_columns.setdefault(section.removeprefix("iris.columns."), {}).update(items)
        elif section == "meta.columns":
            cfg.meta_columns.update(items)
        elif section == "index.columns":
            cfg.index_columns.update(items)
        else:
            raise ConfigInvalid(f"unknown config section [{section}]")


def build_config(flags: dict[str, object], environ: dict[str, str] | None = None) -> RunConfig:
    """Merge the three sources; ``flags`` holds only the options given on the command line."""
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    config_path = flags.get("config") or environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        load_config_file(Path(config_path), cfg)
    for key in PATH_KEYS + ("year_cutoff", "shards", "emit_citation_detail", "force"):
        env_value = environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            _apply(cfg, key, env_value)
    for key, value in flags.items():
        if key == "config" or value is None:
            continue
        if key in PATH_KEYS:
            value = Path(value)
        setattr(cfg, key, value)
    return cfg
