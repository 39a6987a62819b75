"""Closed MIUR publication-type enumeration and the institution type mapping."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

logger = logging.getLogger(__name__)

OTHER = "other"
OTHER_LABEL = "Other (MIUR)"


def _load_builtin() -> tuple[tuple[str, ...], dict[str, str], dict[str, str]]:
    text = resources.files("oc_coverage").joinpath("data/miur_types.csv").read_text("utf-8")
    types: list[str] = []
    by_code: dict[str, str] = {}
    italian: dict[str, str] = {}
    for row in csv.DictReader(io.StringIO(text)):
        types.append(row["miur_type"])
        by_code[row["code"]] = row["miur_type"]
        italian[_fold(row["label_it"])] = row["miur_type"]
    return tuple(types), by_code, italian


def _fold(text: str) -> str:
    return " ".join(text.split()).casefold()


MIUR_TYPES, _BY_CODE, _BY_ITALIAN = _load_builtin()
_BY_LABEL = {_fold(t): t for t in MIUR_TYPES}

# Book-like categories for which an ISBN is a plausible identifier.
ISBN_COMPATIBLE_TYPES = frozenset(
    {
        "monograph or scientific treatise",
        "concordance",
        "critical edition",
        "publication of unpublished sources",
        "scientific commentary",
        "book translation",
        "editorship",
    }
)
assert ISBN_COMPATIBLE_TYPES <= set(MIUR_TYPES)


class MappingError(ValueError):
    """The type mapping file cannot be used."""


def canonical_miur_type(value: str) -> str:
    """Resolve an English label, MIUR code or Italian label to the enumeration member.

    Raises MappingError for anything outside the closed list.
    """
    key = _fold(value)
    for table in (_BY_LABEL, _BY_CODE, _BY_ITALIAN):
        if key in table:
            return table[key]
    raise MappingError(f"unknown MIUR publication type: {value!r}")


def display_label(miur_type: str) -> str:
    return OTHER_LABEL if miur_type == OTHER else miur_type


@dataclass(frozen=True)
class TypeMapping:
    """Institution-specific raw type -> MIUR type lookup (keys are case-folded)."""

    entries: dict[str, str]

    @classmethod
    def from_pairs(cls, pairs) -> TypeMapping:
        entries: dict[str, str] = {}
        for raw, miur in pairs:
            key = _fold(raw)
            if not key:
                continue
            value = canonical_miur_type(miur)
            if key in entries and entries[key] != value:
                raise MappingError(f"conflicting mapping entries for raw type {raw!r}")
            if key in entries:
                logger.warning("duplicate mapping entry for %r", raw)
            entries[key] = value
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> TypeMapping:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"raw_type", "miur_type"} <= set(reader.fieldnames):
                raise MappingError(f"{path}: expected header raw_type,miur_type")
            return cls.from_pairs((row["raw_type"] or "", row["miur_type"] or "") for row in reader)


def map_publication_type(raw_collection: str | None, mapping: TypeMapping) -> str:
    """Exact case-folded, whitespace-trimmed lookup; any miss is the residual ``other``."""
    if not raw_collection:
        return OTHER
    return mapping.entries.get(_fold(raw_collection), OTHER)
