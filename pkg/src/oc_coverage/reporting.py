"""Coverage aggregation, mapping-status sub-datasets and the CSV report tables."""

from __future__ import annotations

import csv
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .dedup import CanonicalMatch
from .index_matcher import CitationStats
from .iris_ingest import IrisRecord, is_eligible
from .miur import MIUR_TYPES, OTHER, OTHER_LABEL
from .pids import Pid, PidExtractionSummary

MATCHED, UNMATCHED, NO_PIDS = "matched", "has_pids_unmatched", "no_pids"
STATUSES = (MATCHED, UNMATCHED, NO_PIDS)
SUBSETS = ("found_in_meta", "not_found_in_meta", "found_in_index", "no_pids")
UNKNOWN_YEAR = "unknown"
RESIDUAL_LABEL = "Other"


class OutputUnwritable(OSError):
    pass


def percent(part: int, whole: int) -> float | None:
    return None if whole == 0 else 100.0 * part / whole


def format_percent(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


@dataclass
class CoverageReport:
    pid_summary: PidExtractionSummary
    citation_stats: CitationStats
    cutoff_year: int
    total_records: int = 0
    eligible_records: int = 0
    excluded_records: int = 0
    unknown_year_records: int = 0
    matched_count: int = 0
    per_year: dict[str, int] = field(default_factory=dict)
    per_type: dict[str, Counter] = field(default_factory=dict)
    subset_sizes: dict[str, int] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)

    @property
    def matched_pct(self) -> float | None:
        return percent(self.matched_count, self.eligible_records)

    def type_total(self, miur_type: str) -> int:
        return sum(self.per_type[miur_type][s] for s in STATUSES)

    def type_coverage(self, miur_type: str) -> float | None:
        return percent(self.per_type[miur_type][MATCHED], self.type_total(miur_type))


def record_status(item_id: str, retained: Mapping[str, frozenset[Pid]], matched: set[str] | frozenset[str]) -> str:
    if item_id in matched:
        return MATCHED
    return UNMATCHED if retained.get(item_id) else NO_PIDS


def compute_coverage_tables(
    records: Iterable[IrisRecord],
    retained: Mapping[str, frozenset[Pid]],
    canonical: Iterable[CanonicalMatch],
    citation_stats: CitationStats,
    summary: PidExtractionSummary,
    cutoff_year: int,
    metadata: Mapping[str, str] | None = None,
) -> CoverageReport:
    report = CoverageReport(summary, citation_stats, cutoff_year, metadata=dict(metadata or {}))
    matched = {c.item_id for c in canonical}
    per_year: Counter = Counter()
    for rec in records:
        report.total_records += 1
        per_year[UNKNOWN_YEAR if rec.year is None else str(rec.year)] += 1
        if not is_eligible(rec, cutoff_year):
            report.excluded_records += 1
            continue
        report.eligible_records += 1
        if rec.year is None:
            report.unknown_year_records += 1
        status = record_status(rec.item_id, retained, matched)
        if status == MATCHED:
            report.matched_count += 1
        report.per_type.setdefault(rec.miur_type, Counter())[status] += 1
    report.per_year = dict(sorted(per_year.items()))
    report.per_type = dict(sorted(report.per_type.items()))
    return report


def distribution_top_types(counts: Mapping[str, int], n: int = 5) -> list[tuple[str, int]]:
    """Top ``n`` types by count (ties alphabetical) plus an aggregated "Other" bucket.

    The MIUR residual type is shown as "Other (MIUR)" so it never merges with
    the display bucket.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ranked = sorted(((t, c) for t, c in counts.items() if c > 0), key=lambda tc: (-tc[1], tc[0]))
    shown = [(OTHER_LABEL if t == OTHER else t, c) for t, c in ranked[:n]]
    return shown + [(RESIDUAL_LABEL, sum(c for _, c in ranked[n:]))]


def _writer(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from exc
    return fh, csv.writer(fh, lineterminator="\n")


SUBSET_COLUMNS = ("item_id", "year", "miur_type", "raw_collection", "title", "pids", "canonical_omid")


def emit_subsets(
    records: Iterable[IrisRecord],
    retained: Mapping[str, frozenset[Pid]],
    canonical: Iterable[CanonicalMatch],
    citing_or_cited: Iterable[str],
    out_dir: str | Path,
    cutoff_year: int,
) -> dict[str, int]:
    """Write the four mapping-status sub-datasets for eligible records; returns their sizes."""
    out_dir = Path(out_dir)
    by_item = {c.item_id: c for c in canonical}
    in_index = set(citing_or_cited)
    handles = {name: _writer(out_dir / f"{name}.csv") for name in SUBSETS}
    sizes = dict.fromkeys(SUBSETS, 0)
    try:
        for _, w in handles.values():
            w.writerow(SUBSET_COLUMNS)
        for rec in records:
            if not is_eligible(rec, cutoff_year):
                continue
            status = record_status(rec.item_id, retained, by_item.keys())
            cm = by_item.get(rec.item_id)
            row = [
                rec.item_id,
                "" if rec.year is None else rec.year,
                rec.miur_type,
                rec.raw_collection,
                rec.title,
                " ".join(sorted(str(p) for p in retained.get(rec.item_id, ()))),
                cm.canonical_omid if cm else "",
            ]
            targets = {MATCHED: ["found_in_meta"], UNMATCHED: ["not_found_in_meta"], NO_PIDS: ["no_pids"]}[status]
            if status == MATCHED and rec.item_id in in_index:
                targets.append("found_in_index")
            for name in targets:
                handles[name][1].writerow(row)
                sizes[name] += 1
    finally:
        for fh, _ in handles.values():
            fh.close()
    return sizes


def write_report_tables(report: CoverageReport, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    fh, w = _writer(out_dir / "coverage.csv")
    with fh:
        w.writerow(["metric", "value"])
        w.writerow(["Total records", report.total_records])
        w.writerow([f"Records published by {report.cutoff_year} or undated", report.eligible_records])
        w.writerow(["Records without publication year", report.unknown_year_records])
        w.writerow([f"Records published after {report.cutoff_year}", report.excluded_records])
        w.writerow(["Records matched in OpenCitations Meta", report.matched_count])
        w.writerow(["Matched (%)", format_percent(report.matched_pct)])
    fh, w = _writer(out_dir / "per_year.csv")
    with fh:
        w.writerow(["year", "records"])
        w.writerows(report.per_year.items())
    fh, w = _writer(out_dir / "per_type_status.csv")
    with fh:
        w.writerow(["miur_type", "total", *STATUSES, "coverage_pct"])
        for t, counts in report.per_type.items():
            w.writerow([t, report.type_total(t), *(counts[s] for s in STATUSES), format_percent(report.type_coverage(t))])


def write_pid_summary(summary: PidExtractionSummary, path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["label", "value"])
        w.writerows(summary.rows())


def read_pid_summary(path: str | Path) -> PidExtractionSummary:
    with open(path, newline="", encoding="utf-8") as fh:
        return PidExtractionSummary.from_rows((r["label"], int(r["value"])) for r in csv.DictReader(fh))


def write_rejections(summary: PidExtractionSummary, path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["scheme", "reason", "count"])
        for (scheme, reason), n in sorted(summary.rejections.items()):
            w.writerow([scheme, reason, n])


def read_rejections(path: str | Path) -> Counter:
    with open(path, newline="", encoding="utf-8") as fh:
        return Counter({(r["scheme"], r["reason"]): int(r["count"]) for r in csv.DictReader(fh)})


def all_types_in_order(report: CoverageReport) -> list[str]:
    """Types present in the report, in enumeration order."""
    return [t for t in MIUR_TYPES if t in report.per_type]
