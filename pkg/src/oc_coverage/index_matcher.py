"""Citation links from the OpenCitations Index that involve the institution's OMIDs."""

from __future__ import annotations

import csv
import gzip
import io
import logging
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

from . import dumps
from .dedup import CanonicalMatch
from .parallel import map_units

logger = logging.getLogger(__name__)

DEFAULT_INDEX_COLUMNS = {"oci": "oci", "citing": "citing", "cited": "cited"}
INDEX_COLUMNS = ("oci", "citing", "cited", "creation", "timespan", "journal_sc", "author_sc")

OUTGOING, INCOMING, INTERNAL = "outgoing", "incoming", "internal"
PROGRESS_EVERY = 5_000_000


class ZeroMatchedRecords(ZeroDivisionError):
    pass


class CitationLink(NamedTuple):
    oci: str
    citing_omid: str
    cited_omid: str
    direction: str


def normalize_omid(cell: str) -> str | None:
    """Accept ``omid:br/...`` or bare ``br/...``; a multi-id cell yields its omid token."""
    cell = cell.strip()
    if not cell:
        return None
    if " " in cell:
        return next((t for t in cell.split() if t.startswith("omid:")), None)
    return cell if cell.startswith("omid:") else "omid:" + cell


def normalize_oci(cell: str) -> str:
    cell = cell.strip()
    return cell[4:] if cell.startswith("oci:") else cell


def classify(citing: str, cited: str, omids: frozenset[str] | set[str]) -> str | None:
    a, b = citing in omids, cited in omids
    if a and b:
        return INTERNAL
    if a:
        return OUTGOING
    if b:
        return INCOMING
    return None


@dataclass
class IndexScanResult:
    links: list[CitationLink] = field(default_factory=list)
    counters: Counter = field(default_factory=Counter)


def _scan_unit(unit: dumps.DumpFile, shared) -> IndexScanResult:
    omids, columns = shared
    out = IndexScanResult()
    c = out.counters
    found: set[CitationLink] = set()
    try:
        with unit.open_text() as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader, [])]
            pos = dumps.column_indexes(header, columns, unit.label)
            oci_i, citing_i, cited_i = pos["oci"], pos["citing"], pos["cited"]
            need = max(oci_i, citing_i, cited_i) + 1
            rows = 0
            for row in reader:
                rows += 1
                if rows % PROGRESS_EVERY == 0:
                    logger.info("%s: %d rows scanned", unit.label, rows)
                if len(row) < need:
                    c["malformed_rows"] += 1
                    continue
                citing, cited = row[citing_i], row[cited_i]
                # cheap membership test before any normalization work
                if citing not in omids and cited not in omids:
                    citing, cited = normalize_omid(citing), normalize_omid(cited)
                    if citing is None or cited is None:
                        c["malformed_rows"] += 1
                        continue
                    if citing not in omids and cited not in omids:
                        continue
                else:
                    citing, cited = normalize_omid(citing), normalize_omid(cited)
                    if citing is None or cited is None:
                        c["malformed_rows"] += 1
                        continue
                oci = normalize_oci(row[oci_i])
                if not oci:
                    c["malformed_rows"] += 1
                    continue
                found.add(CitationLink(oci, citing, cited, classify(citing, cited, omids)))
    except dumps.DumpLayoutError as exc:
        logger.error("%s", exc)
        return IndexScanResult(counters=Counter(unreadable_files=1))
    except dumps.READ_ERRORS + (dumps.UnreadableDumpFile,) as exc:
        logger.error("unreadable dump file %s: %s", unit.label, exc)
        return IndexScanResult(counters=Counter(unreadable_files=1))
    c["rows"] += rows
    c["files"] += 1
    out.links = sorted(found)
    return out


def scan_index_dump(
    dump: str | Path,
    omids: Iterable[str],
    columns: Mapping[str, str] | None = None,
    shards: int = 1,
) -> IndexScanResult:
    """Every distinct link whose citing or cited OMID is in ``omids``, sorted by OCI."""
    omids = frozenset(omids)
    columns = {**DEFAULT_INDEX_COLUMNS, **(columns or {})}
    units = dumps.list_dump_files(dump)
    if units:
        dumps.column_indexes(dumps.read_header(units[0]), columns, units[0].label)
    result = IndexScanResult()
    links: set[CitationLink] = set()
    for part in map_units(_scan_unit, units, (omids, columns), shards):
        links.update(part.links)
        result.counters.update(part.counters)
    result.links = sorted(links)
    logger.info("index scan: %d link(s) over %d file(s)", len(result.links), len(units))
    return result


@dataclass(frozen=True)
class CitationStats:
    outgoing_total: int = 0
    incoming_total: int = 0
    internal_total: int = 0
    outgoing_avg: float | None = None
    incoming_avg: float | None = None
    # distinct OCIs before merging duplicate-OMID citations of the same record
    outgoing_ocis: int = 0
    incoming_ocis: int = 0


@dataclass
class RecordCitations:
    outgoing: set = field(default_factory=set)
    incoming: set = field(default_factory=set)


def omid_owners(canonical: Iterable[CanonicalMatch]) -> dict[str, tuple[str, ...]]:
    owners: dict[str, set[str]] = {}
    for cm in canonical:
        for omid in cm.all_omids:
            owners.setdefault(omid, set()).add(cm.item_id)
    return {omid: tuple(sorted(items)) for omid, items in owners.items()}


def dedup_citations(
    links: Iterable[CitationLink], canonical: Iterable[CanonicalMatch]
) -> tuple[dict[str, RecordCitations], CitationStats]:
    """Count citations once per logical pair of entities.

    An endpoint OMID belonging to the institution stands for the record(s) that
    matched it, so two OCIs that differ only by which duplicate OMID of a record
    they use collapse into one citation. Other endpoints stay keyed by OMID.
    """
    owners = omid_owners(canonical)

    def key(omid: str) -> tuple[str, object]:
        items = owners.get(omid)
        return ("record", items) if items else ("omid", omid)

    per_record: dict[str, RecordCitations] = {}
    outgoing, incoming, internal = set(), set(), set()
    out_ocis, in_ocis = set(), set()
    seen_oci = set()
    for link in sorted(links):
        if link.oci in seen_oci:
            continue
        seen_oci.add(link.oci)
        citing_items = owners.get(link.citing_omid, ())
        cited_items = owners.get(link.cited_omid, ())
        pair = (key(link.citing_omid), key(link.cited_omid))
        if citing_items:
            outgoing.add(pair)
            out_ocis.add(link.oci)
            for item in citing_items:
                per_record.setdefault(item, RecordCitations()).outgoing.add(pair[1])
        if cited_items:
            incoming.add(pair)
            in_ocis.add(link.oci)
            for item in cited_items:
                per_record.setdefault(item, RecordCitations()).incoming.add(pair[0])
        if citing_items and cited_items and any(a != b for a in citing_items for b in cited_items):
            internal.add(pair)
    stats = CitationStats(len(outgoing), len(incoming), len(internal), None, None, len(out_ocis), len(in_ocis))
    return per_record, stats


def compute_citation_averages(stats: CitationStats, matched_record_count: int) -> CitationStats:
    if matched_record_count <= 0:
        raise ZeroMatchedRecords("no matched records to average over")
    return replace(
        stats,
        outgoing_avg=stats.outgoing_total / matched_record_count,
        incoming_avg=stats.incoming_total / matched_record_count,
    )


def format_average(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


STATS_LABELS = (
    "IRIS records as citing entity",
    "IRIS records as cited entity",
    "Citations between IRIS records",
)


def write_citation_stats(stats: CitationStats, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "total", "average", "distinct_ocis"])
        writer.writerow([STATS_LABELS[0], stats.outgoing_total, format_average(stats.outgoing_avg), stats.outgoing_ocis])
        writer.writerow([STATS_LABELS[1], stats.incoming_total, format_average(stats.incoming_avg), stats.incoming_ocis])
        writer.writerow([STATS_LABELS[2], stats.internal_total, "", ""])


def read_citation_stats(path: str | Path) -> CitationStats:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = {r["metric"]: r for r in csv.DictReader(fh)}
    out, inc, internal = (rows[label] for label in STATS_LABELS)
    return CitationStats(
        int(out["total"]),
        int(inc["total"]),
        int(internal["total"]),
        float(out["average"]) if out["average"] else None,
        float(inc["average"]) if inc["average"] else None,
        int(out["distinct_ocis"]),
        int(inc["distinct_ocis"]),
    )


def write_record_citations(per_record: Mapping[str, RecordCitations], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["item_id", "outgoing", "incoming"])
        for item in sorted(per_record):
            rc = per_record[item]
            writer.writerow([item, len(rc.outgoing), len(rc.incoming)])


def read_record_citations(path: str | Path) -> dict[str, tuple[int, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {r["item_id"]: (int(r["outgoing"]), int(r["incoming"])) for r in csv.DictReader(fh)}


def write_citation_detail(links: Iterable[CitationLink], path: str | Path) -> None:
    # mtime pinned so the archive is byte-stable across runs
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
        with io.TextIOWrapper(gz, encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["oci", "citing", "cited", "direction"])
            writer.writerows(links)
