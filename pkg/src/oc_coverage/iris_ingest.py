"""Reading the seven IRIS export tables and joining them into publication records."""

from __future__ import annotations

import csv
import json
import logging
import re
import sys
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .miur import TypeMapping, map_publication_type

logger = logging.getLogger(__name__)

csv.field_size_limit(min(sys.maxsize, 2**31 - 1))

TABLE_NAMES = ("actors", "author_lists", "identifiers", "language", "master", "publisher", "relation")
SPINE_TABLES = ("master", "identifiers")

DEFAULT_FILES = {
    "actors": "actors.csv",
    "author_lists": "author_lists.csv",
    "identifiers": "identifiers.csv",
    "language": "language.csv",
    "master": "master.csv",
    "publisher": "publisher.csv",
    "relation": "relation.csv",
}

ISBN_FIELDS = ("IDE_ISBN", "IDE_ISBN_1", "IDE_ISBN_2", "IDE_ISBN_3", "IDE_EISBN")
ID_FIELDS = ("IDE_DOI", "IDE_PMID") + ISBN_FIELDS

# Columns each table must carry; everything else in a file is read through untouched.
REQUIRED_COLUMNS = {
    "actors": ("ITEM_ID",),
    "author_lists": ("ITEM_ID",),
    "identifiers": ("ITEM_ID",) + ID_FIELDS,
    "language": ("ITEM_ID",),
    "master": ("ITEM_ID", "DATE_ISSUED_YEAR", "TITLE", "OWNING_COLLECTION", "OWNING_COLLECTION_DES"),
    "publisher": ("ITEM_ID",),
    "relation": ("ITEM_ID",),
}

# Full column lists of the standard export, used by writers of synthetic exports.
TABLE_COLUMNS = {
    "actors": ("ITEM_ID", "RM_PERSON_ID", "PID", "ORCID", "FIRST_NAME", "LAST_NAME", "PLACE"),
    "author_lists": (
        "ITEM_ID", "DES_ALLPEOPLE", "DES_ALLPEOPLEORIGINAL", "DES_NUMBEROFAUTHORS", "DES_NUMBEROFAUTHORS_INT",
    ),
    "identifiers": (
        "ITEM_ID", "IDE_DOI", "IDE_EISBN", "IDE_ISBN", "IDE_ISBN_1", "IDE_ISBN_2", "IDE_ISBN_3",
        "IDE_ISMN", "IDE_OTHER", "IDE_PATENTNO", "IDE_PATENTNOGR", "IDE_PATENTNOPB", "IDE_PMID",
        "IDE_SOURCE", "IDE_UGOV", "IDE_URL", "IDE_URL_1", "IDE_URL_2", "IDE_URL_3", "IDE_CITATION",
    ),
    "language": ("ITEM_ID", "LAN_ISO", "LAN_ISO_I18N"),
    "master": ("ITEM_ID", "DATE_ISSUED_YEAR", "TITLE", "OWNING_COLLECTION", "OWNING_COLLECTION_DES"),
    "publisher": ("ITEM_ID", "PUB_NAME", "PUB_PLACE", "PUB_COUNTRY", "PUB_COUNTRY_I18N"),
    "relation": ("ITEM_ID", "REL_ISPARTOFBOOK", "REL_ISPARTOFJOURNAL", "REL_ISSN", "REL_VOLUME"),
}

_YEAR_RE = re.compile(r"[0-9]{4}")


class IngestError(Exception):
    """Base class for IRIS export problems that abort ingestion."""


class MissingSpineTable(IngestError):
    pass


class MalformedHeader(IngestError):
    pass


@dataclass
class IrisRawTables:
    tables: dict[str, list[dict[str, str]]]
    skipped_rows: Counter = field(default_factory=Counter)

    def __getitem__(self, name: str) -> list[dict[str, str]]:
        return self.tables[name]


@dataclass(frozen=True)
class IrisRecord:
    item_id: str
    title: str
    year: int | None
    raw_collection: str
    miur_type: str
    raw_ids: Mapping[str, tuple[str, ...]]
    language: str | None = None
    author_count: int | None = None


def _read_table(path: Path, name: str, renames: Mapping[str, str]) -> tuple[list[dict[str, str]], int]:
    reverse = {actual: canonical for canonical, actual in renames.items()}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader(f"{path}: empty file, header row is mandatory") from None
        header = [reverse.get(col.strip(), col.strip()) for col in header]
        missing = [col for col in REQUIRED_COLUMNS[name] if col not in header]
        if missing:
            raise MalformedHeader(f"{path}: missing column(s) {', '.join(missing)}")
        width = len(header)
        rows = []
        skipped = 0
        for values in reader:
            if not values:
                continue
            if len(values) != width:
                skipped += 1
                continue
            row = dict(zip(header, values))
            if not row["ITEM_ID"].strip():
                skipped += 1
                continue
            row["ITEM_ID"] = row["ITEM_ID"].strip()
            rows.append(row)
    return rows, skipped


def load_iris_tables(
    directory: str | Path,
    format_config: Mapping[str, str] | None = None,
    column_overrides: Mapping[str, Mapping[str, str]] | None = None,
) -> IrisRawTables:
    """Parse the seven export tables found in ``directory``.

    ``format_config`` maps table name to file name (defaults in DEFAULT_FILES);
    ``column_overrides`` maps table name to {canonical column: column in file}.
    Optional tables that are absent load as empty with a warning.
    """
    directory = Path(directory)
    files = {**DEFAULT_FILES, **(format_config or {})}
    column_overrides = column_overrides or {}
    tables: dict[str, list[dict[str, str]]] = {}
    skipped: Counter = Counter()
    for name in TABLE_NAMES:
        path = directory / files[name]
        if not path.is_file():
            if name in SPINE_TABLES:
                raise MissingSpineTable(f"required table {name!r} not found at {path}")
            logger.warning("optional table %r not found at %s; using an empty table", name, path)
            tables[name] = []
            continue
        rows, bad = _read_table(path, name, column_overrides.get(name, {}))
        tables[name] = rows
        if bad:
            skipped[name] = bad
            logger.warning("%s: skipped %d malformed row(s)", path, bad)
    return IrisRawTables(tables, skipped)


def _parse_year(text: str | None) -> int | None:
    text = (text or "").strip()
    if not _YEAR_RE.fullmatch(text):
        return None
    year = int(text)
    return year if 1000 <= year <= 2100 else None


def _parse_count(text: str | None) -> int | None:
    text = (text or "").strip()
    return int(text) if text.isascii() and text.isdigit() else None


def _first_by_key(rows: Iterable[dict[str, str]], label: str, counters: Counter) -> dict[str, dict[str, str]]:
    first: dict[str, dict[str, str]] = {}
    collisions = 0
    for row in rows:
        if row["ITEM_ID"] in first:
            collisions += 1
        else:
            first[row["ITEM_ID"]] = row
    if collisions:
        counters[f"{label}_collisions"] += collisions
        logger.info("%s: %d extra row(s) per key ignored for scalar fields", label, collisions)
    return first


def _language_column(rows: list[dict[str, str]], preferred: str) -> str | None:
    if not rows:
        return None
    if preferred in rows[0]:
        return preferred
    others = [col for col in rows[0] if col != "ITEM_ID"]
    return others[0] if others else None


def join_records(
    tables: IrisRawTables,
    mapping: TypeMapping,
    counters: Counter | None = None,
    language_column: str = "LAN_ISO",
) -> list[IrisRecord]:
    """One record per distinct master ITEM_ID, in ascending item_id order.

    Identifier values from several rows for the same key are unioned (kept
    sorted); scalar side fields take the first row in file order.
    """
    counters = counters if counters is not None else Counter()
    master = _first_by_key(tables["master"], "master", counters)

    ids: dict[str, dict[str, list[str]]] = {}
    id_rows = Counter()
    for row in tables["identifiers"]:
        item = row["ITEM_ID"]
        if item not in master:
            continue
        id_rows[item] += 1
        slot = ids.setdefault(item, {})
        for fld in ID_FIELDS:
            value = (row.get(fld) or "").strip()
            if value:
                values = slot.setdefault(fld, [])
                if value not in values:
                    values.append(value)
    multi = sum(1 for n in id_rows.values() if n > 1)
    if multi:
        counters["identifiers_multi_row_records"] += multi
        logger.info("identifiers: %d record(s) spread over several rows; values unioned", multi)

    authors = _first_by_key(tables["author_lists"], "author_lists", counters)
    languages = _first_by_key(tables["language"], "language", counters)
    lang_col = _language_column(tables["language"], language_column)

    records = []
    for item in sorted(master):
        row = master[item]
        raw_collection = (row.get("OWNING_COLLECTION_DES") or "").strip()
        author_row = authors.get(item)
        author_count = None
        if author_row is not None:
            author_count = _parse_count(author_row.get("DES_NUMBEROFAUTHORS_INT"))
            if author_count is None:
                author_count = _parse_count(author_row.get("DES_NUMBEROFAUTHORS"))
        language = None
        if lang_col and item in languages:
            language = (languages[item].get(lang_col) or "").strip() or None
        records.append(
            IrisRecord(
                item_id=item,
                title=(row.get("TITLE") or "").strip(),
                year=_parse_year(row.get("DATE_ISSUED_YEAR")),
                raw_collection=raw_collection,
                miur_type=map_publication_type(raw_collection, mapping),
                raw_ids={fld: tuple(sorted(vals)) for fld, vals in ids.get(item, {}).items()},
                language=language,
                author_count=author_count,
            )
        )
    return records


def filter_by_year(records: Iterable[IrisRecord], cutoff_year: int) -> tuple[list[IrisRecord], list[IrisRecord]]:
    """Split into (kept, excluded); records without a year are kept."""
    if not 1000 <= cutoff_year <= 2100:
        raise ValueError(f"cutoff year out of range: {cutoff_year}")
    kept, excluded = [], []
    for rec in records:
        (excluded if rec.year is not None and rec.year > cutoff_year else kept).append(rec)
    return kept, excluded


def is_eligible(record: IrisRecord, cutoff_year: int) -> bool:
    return record.year is None or record.year <= cutoff_year


# -- internal record file ----------------------------------------------------

RECORD_COLUMNS = ("item_id", "year", "title", "raw_collection", "miur_type", "language", "author_count", "raw_ids")


def write_records(records: Iterable[IrisRecord], path: str | Path) -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.item_id,
                    "" if rec.year is None else rec.year,
                    rec.title,
                    rec.raw_collection,
                    rec.miur_type,
                    rec.language or "",
                    "" if rec.author_count is None else rec.author_count,
                    json.dumps({k: list(v) for k, v in sorted(rec.raw_ids.items())}, ensure_ascii=False),
                ]
            )
            n += 1
    return n


def read_records(path: str | Path) -> list[IrisRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            IrisRecord(
                item_id=row["item_id"],
                title=row["title"],
                year=int(row["year"]) if row["year"] else None,
                raw_collection=row["raw_collection"],
                miur_type=row["miur_type"],
                raw_ids={k: tuple(v) for k, v in json.loads(row["raw_ids"]).items()},
                language=row["language"] or None,
                author_count=int(row["author_count"]) if row["author_count"] else None,
            )
            for row in csv.DictReader(fh)
        ]
