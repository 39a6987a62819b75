"""Single streaming pass over the OpenCitations Meta dump, matching identifiers against the PID index."""

from __future__ import annotations

import calendar
import csv
import logging
import re
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from . import dumps
from .parallel import map_units
from .pids import NORMALIZERS, InvalidPid, Pid, PidIndex, match_forms

logger = logging.getLogger(__name__)

META_COLUMNS = ("id", "title", "author", "pub_date", "venue", "volume", "issue", "page", "type", "publisher", "editor")
# logical name -> default header name; only these are needed for matching
DEFAULT_META_COLUMNS = {"id": "id", "title": "title", "pub_date": "pub_date", "type": "type"}

PROGRESS_EVERY = 1_000_000


class NoOmid(ValueError):
    pass


class PartialDate(NamedTuple):
    year: int
    month: int | None = None
    day: int | None = None


_DATE_RE = re.compile(r"([0-9]{4})(?:-([0-9]{2})(?:-([0-9]{2}))?)?")


def parse_partial_date(text: str | None) -> PartialDate | None:
    """YYYY, YYYY-MM or YYYY-MM-DD; anything else (including impossible months/days) is None."""
    m = _DATE_RE.fullmatch((text or "").strip())
    if not m:
        return None
    year = int(m[1])
    if m[2] is None:
        return PartialDate(year)
    month = int(m[2])
    if not 1 <= month <= 12:
        return None
    if m[3] is None:
        return PartialDate(year, month)
    day = int(m[3])
    if not 1 <= day <= calendar.monthrange(year, month)[1]:
        return None
    return PartialDate(year, month, day)


def parse_meta_id_cell(cell: str) -> tuple[str, set[Pid]]:
    """Split a Meta ``id`` cell into its OMID and the normalized DOI/PMID/ISBN it carries."""
    omid = None
    ids: set[Pid] = set()
    for token in cell.split(" "):
        scheme, sep, value = token.partition(":")
        if not sep:
            continue
        if scheme == "omid":
            if omid is None:
                omid = token
        elif scheme in NORMALIZERS:
            try:
                ids.add(NORMALIZERS[scheme](value))
            except InvalidPid:
                pass
    if omid is None:
        raise NoOmid(f"no omid in id cell {cell!r}")
    return omid, ids


class MetaMatch(NamedTuple):
    item_id: str
    omid: str
    matched_pid: Pid
    pub_date: str
    meta_type: str


@dataclass
class ScanResult:
    matches: list[MetaMatch] = field(default_factory=list)
    counters: Counter = field(default_factory=Counter)


def _scan_unit(unit: dumps.DumpFile, shared) -> ScanResult:
    index, columns = shared
    forward = index.forward
    out = ScanResult()
    c = out.counters
    try:
        with unit.open_text() as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader, [])]
            pos = dumps.column_indexes(header, columns, unit.label)
            id_i, date_i, type_i = pos["id"], pos["pub_date"], pos["type"]
            width = len(header)
            matches = []
            rows = 0
            for row in reader:
                rows += 1
                if rows % PROGRESS_EVERY == 0:
                    logger.info("%s: %d rows scanned", unit.label, rows)
                if len(row) != width:
                    c["malformed_rows"] += 1
                    continue
                omid = None
                hits: list[tuple[Pid, set[str]]] = []
                for token in row[id_i].split(" "):
                    scheme, sep, value = token.partition(":")
                    if scheme == "omid":
                        if omid is None:
                            omid = token
                        continue
                    norm = NORMALIZERS.get(scheme)
                    if norm is None or not sep:
                        continue
                    pid = Pid(scheme, value)
                    # canonical values are normalizer fixed points, so a hit needs no normalization
                    if pid not in forward:
                        try:
                            pid = norm(value)
                        except InvalidPid:
                            continue
                    for form in match_forms(pid):
                        items = forward.get(form)
                        if items:
                            hits.append((form, items))
                if omid is None:
                    c["no_omid_rows"] += 1
                    continue
                if not hits:
                    continue
                date = row[date_i].strip()
                if date and parse_partial_date(date) is None:
                    c["invalid_dates"] += 1
                    date = ""
                meta_type = row[type_i].strip()
                seen = set()
                for pid, items in hits:
                    for item in items:
                        if (pid, item) not in seen:
                            seen.add((pid, item))
                            matches.append(MetaMatch(item, omid, pid, date, meta_type))
    except dumps.DumpLayoutError as exc:
        logger.error("%s", exc)
        return ScanResult(counters=Counter(unreadable_files=1))
    except dumps.READ_ERRORS + (dumps.UnreadableDumpFile,) as exc:
        logger.error("unreadable dump file %s: %s", unit.label, exc)
        return ScanResult(counters=Counter(unreadable_files=1))
    c["rows"] += rows
    c["files"] += 1
    out.matches = matches
    return out


def scan_meta_dump(
    dump: str | Path,
    index: PidIndex,
    columns: Mapping[str, str] | None = None,
    shards: int = 1,
) -> ScanResult:
    """All (record, OMID) candidates for rows whose identifiers hit the index, canonically sorted."""
    columns = {**DEFAULT_META_COLUMNS, **(columns or {})}
    units = dumps.list_dump_files(dump)
    if units:
        dumps.column_indexes(dumps.read_header(units[0]), columns, units[0].label)
    result = ScanResult()
    for part in map_units(_scan_unit, units, (index, columns), shards):
        result.matches.extend(part.matches)
        result.counters.update(part.counters)
    result.matches.sort(key=match_sort_key)
    logger.info("meta scan: %d match(es) over %d file(s)", len(result.matches), len(units))
    return result


def match_sort_key(m: MetaMatch) -> tuple:
    return (m.item_id, m.omid, m.matched_pid, m.pub_date, m.meta_type)


MATCH_COLUMNS = ("item_id", "omid", "scheme", "pid_value", "pub_date", "meta_type")


def write_meta_matches(matches: Iterable[MetaMatch], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MATCH_COLUMNS)
        for m in matches:
            writer.writerow([m.item_id, m.omid, m.matched_pid.scheme, m.matched_pid.value, m.pub_date, m.meta_type])


def read_meta_matches(path: str | Path) -> list[MetaMatch]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            MetaMatch(r["item_id"], r["omid"], Pid(r["scheme"], r["pid_value"]), r["pub_date"], r["meta_type"])
            for r in csv.DictReader(fh)
        ]
