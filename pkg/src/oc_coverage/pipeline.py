"""Resumable pipeline stages; each one persists plain CSV intermediates plus a manifest."""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import logging
import os
from collections import Counter
from pathlib import Path

from . import __version__, dumps
from .config import RunConfig
from .dedup import dedup_matches, read_canonical_matches, write_canonical_matches
from .html_report import render_html_report
from .index_matcher import (
    ZeroMatchedRecords,
    compute_citation_averages,
    dedup_citations,
    read_citation_stats,
    read_record_citations,
    scan_index_dump,
    write_citation_detail,
    write_citation_stats,
    write_record_citations,
)
from .iris_ingest import DEFAULT_FILES, TABLE_NAMES, is_eligible, join_records, load_iris_tables, read_records, write_records
from .meta_matcher import read_meta_matches, scan_meta_dump, write_meta_matches
from .miur import TypeMapping
from .pids import FilteredRecord, Pid, PidIndex, build_pid_index, process_record
from .reporting import (
    compute_coverage_tables,
    emit_subsets,
    read_pid_summary,
    read_rejections,
    write_pid_summary,
    write_rejections,
    write_report_tables,
)

logger = logging.getLogger(__name__)

STAGES = ("convert", "analyze", "map-meta", "map-index", "report")

RECORDS = "records.csv"
RECORD_PIDS = "record_pids.csv"
PID_SUMMARY = "pid_summary.csv"
PID_REJECTIONS = "pid_rejections.csv"
META_MATCHES = "meta_matches.csv"
CANONICAL = "canonical_matches.csv"
CITATION_STATS = "citation_stats.csv"
RECORD_CITATIONS = "record_citations.csv"
CITATION_DETAIL = "citations_detail.csv.gz"

# intermediate file -> producing stage
PRODUCER = {
    RECORDS: "convert",
    RECORD_PIDS: "analyze",
    PID_SUMMARY: "analyze",
    PID_REJECTIONS: "analyze",
    META_MATCHES: "map-meta",
    CANONICAL: "map-meta",
    CITATION_STATS: "map-index",
    RECORD_CITATIONS: "map-index",
}


class StageError(Exception):
    pass


class StageInputMissing(StageError):
    pass


class StaleIntermediate(StageError):
    pass


def now() -> str:
    """UTC timestamp; pinned by SOURCE_DATE_EPOCH for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else dt.datetime.now(dt.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _manifest_path(out: Path, stage: str) -> Path:
    return out / "manifests" / f"{stage}.json"


def read_manifest(out: Path, stage: str) -> dict | None:
    path = _manifest_path(out, stage)
    if not path.is_file():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def write_manifest(out: Path, stage: str, inputs: dict, outputs: list[str], counters: dict) -> None:
    manifest = {
        "stage": stage,
        "version": __version__,
        "created": now(),
        "inputs": inputs,
        "outputs": {name: file_digest(out / name) for name in outputs},
        "counters": dict(sorted(counters.items())),
    }
    path = _manifest_path(out, stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_run_log(out)


def _write_run_log(out: Path) -> None:
    lines = []
    for stage in STAGES:
        m = read_manifest(out, stage)
        if m is not None:
            lines.append(json.dumps({"stage": stage, "created": m["created"], "counters": m["counters"]}, sort_keys=True))
    (out / "run_log.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def require(cfg: RunConfig, names: list[str], params: dict) -> dict:
    """Check intermediates exist and still match the manifests that produced them.

    Returns {file: digest} for the consuming stage's own manifest.
    """
    out = cfg.out
    digests = {}
    for name in names:
        stage = PRODUCER[name]
        path = out / name
        manifest = read_manifest(out, stage)
        if manifest is None or not path.is_file():
            raise StageInputMissing(f"{name} not found in {out}; run `{stage}` first")
        digests[name] = file_digest(path)
        if cfg.force:
            continue
        if manifest["outputs"].get(name) != digests[name]:
            raise StaleIntermediate(f"{name} was modified after `{stage}` wrote it (use --force to override)")
        for key, value in manifest["inputs"].items():
            if key in PRODUCER and (out / key).is_file() and file_digest(out / key) != value:
                raise StaleIntermediate(
                    f"`{stage}` output {name} was built from an older {key}; re-run `{stage}` (or --force)"
                )
            if key.startswith("param:") and key in params and params[key] != value:
                raise StaleIntermediate(
                    f"`{stage}` ran with {key[6:]}={value}, now {params[key]}; re-run `{stage}` (or --force)"
                )
    return digests


# -- stages ------------------------------------------------------------------


def convert(cfg: RunConfig) -> dict:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    mapping = TypeMapping.load(cfg.mapping)
    tables = load_iris_tables(cfg.iris_dir, cfg.iris_files, cfg.iris_columns)
    counters: Counter = Counter({f"skipped_rows_{k}": v for k, v in tables.skipped_rows.items()})
    records = join_records(tables, mapping, counters)
    counters["records"] = write_records(records, out / RECORDS)
    files = {**DEFAULT_FILES, **cfg.iris_files}
    inputs = {"mapping": file_digest(cfg.mapping)}
    for name in TABLE_NAMES:
        path = cfg.iris_dir / files[name]
        inputs[f"iris:{name}"] = file_digest(path) if path.is_file() else None
    inputs["param:iris_columns"] = _json_digest(cfg.iris_columns)
    write_manifest(out, "convert", inputs, [RECORDS], counters)
    logger.info("convert: %d records", counters["records"])
    return dict(counters)


def write_record_pids(filtered: list[FilteredRecord], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item_id", "pids", "misassigned_isbns"])
        for rec in filtered:
            w.writerow([rec.item_id, " ".join(sorted(str(p) for p in rec.retained)), rec.misassigned])


def read_record_pids(path: Path) -> dict[str, frozenset[Pid]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {r["item_id"]: frozenset(Pid.parse(t) for t in r["pids"].split()) for r in csv.DictReader(fh)}


def analyze(cfg: RunConfig) -> dict:
    out = cfg.out
    inputs = require(cfg, [RECORDS], {})
    records = read_records(out / RECORDS)
    filtered = [process_record(r) for r in records]
    _, summary = build_pid_index(filtered)
    write_record_pids(filtered, out / RECORD_PIDS)
    write_pid_summary(summary, out / PID_SUMMARY)
    write_rejections(summary, out / PID_REJECTIONS)
    counters = {label: value for label, value in summary.rows()}
    write_manifest(out, "analyze", inputs, [RECORD_PIDS, PID_SUMMARY, PID_REJECTIONS], counters)
    logger.info("analyze: final PID list size %d", summary.final_pid_list_size)
    return counters


def map_meta(cfg: RunConfig) -> dict:
    out = cfg.out
    params = {"param:year_cutoff": cfg.year_cutoff}
    inputs = require(cfg, [RECORDS, RECORD_PIDS], params)
    eligible = {r.item_id for r in read_records(out / RECORDS) if is_eligible(r, cfg.year_cutoff)}
    index = PidIndex()
    for item, pids in read_record_pids(out / RECORD_PIDS).items():
        if item in eligible:
            for pid in pids:
                index.add(pid, item)
    scan = scan_meta_dump(cfg.meta_dump, index, cfg.meta_columns, cfg.shards)
    canonical = dedup_matches(scan.matches)
    write_meta_matches(scan.matches, out / META_MATCHES)
    write_canonical_matches(canonical, out / CANONICAL)
    counters = dict(scan.counters)
    counters.update(indexed_pids=len(index), matches=len(scan.matches), matched_records=len(canonical))
    inputs.update(params)
    inputs["meta_dump"] = _json_digest(dumps.fingerprint(cfg.meta_dump))
    inputs["param:meta_columns"] = _json_digest(cfg.meta_columns)
    write_manifest(out, "map-meta", inputs, [META_MATCHES, CANONICAL], counters)
    logger.info("map-meta: %d matched records", len(canonical))
    return counters


def map_index(cfg: RunConfig) -> dict:
    out = cfg.out
    params = {"param:year_cutoff": cfg.year_cutoff}
    inputs = require(cfg, [META_MATCHES, CANONICAL], params)
    matches = read_meta_matches(out / META_MATCHES)
    canonical = read_canonical_matches(out / CANONICAL, matches)
    omids = {omid for cm in canonical for omid in cm.all_omids}
    scan = scan_index_dump(cfg.index_dump, omids, cfg.index_columns, cfg.shards)
    per_record, stats = dedup_citations(scan.links, canonical)
    try:
        stats = compute_citation_averages(stats, len(canonical))
    except ZeroMatchedRecords:
        logger.warning("no matched records; citation averages left empty")
    write_citation_stats(stats, out / CITATION_STATS)
    write_record_citations(per_record, out / RECORD_CITATIONS)
    outputs = [CITATION_STATS, RECORD_CITATIONS]
    if cfg.emit_citation_detail:
        write_citation_detail(scan.links, out / CITATION_DETAIL)
        outputs.append(CITATION_DETAIL)
    counters = dict(scan.counters)
    counters.update(links=len(scan.links), omids=len(omids))
    inputs.update(params)
    inputs["index_dump"] = _json_digest(dumps.fingerprint(cfg.index_dump))
    inputs["param:index_columns"] = _json_digest(cfg.index_columns)
    write_manifest(out, "map-index", inputs, outputs, counters)
    logger.info("map-index: %d links", len(scan.links))
    return counters


def report(cfg: RunConfig) -> dict:
    out = cfg.out
    params = {"param:year_cutoff": cfg.year_cutoff}
    needed = [RECORDS, RECORD_PIDS, PID_SUMMARY, PID_REJECTIONS, META_MATCHES, CANONICAL, CITATION_STATS, RECORD_CITATIONS]
    inputs = require(cfg, needed, params)
    records = read_records(out / RECORDS)
    retained = read_record_pids(out / RECORD_PIDS)
    summary = read_pid_summary(out / PID_SUMMARY)
    summary.rejections = read_rejections(out / PID_REJECTIONS)
    canonical = read_canonical_matches(out / CANONICAL, read_meta_matches(out / META_MATCHES))
    stats = read_citation_stats(out / CITATION_STATS)
    participating = read_record_citations(out / RECORD_CITATIONS)

    metadata = {"generated": now(), "tool version": __version__, "year cutoff": str(cfg.year_cutoff)}
    scan_counters: dict[str, int] = {}
    for stage in ("map-meta", "map-index"):
        m = read_manifest(out, stage) or {}
        prefix = "meta" if stage == "map-meta" else "index"
        for key, value in m.get("counters", {}).items():
            scan_counters[f"{prefix} {key.replace('_', ' ')}"] = value
    if cfg.meta_dump is not None:
        metadata["meta dump"] = str(cfg.meta_dump)
    if cfg.index_dump is not None:
        metadata["index dump"] = str(cfg.index_dump)

    cov = compute_coverage_tables(records, retained, canonical, stats, summary, cfg.year_cutoff, metadata)
    cov.counters = scan_counters
    cov.subset_sizes = emit_subsets(
        records, retained, canonical, (i for i, (o, n) in participating.items() if o + n > 0),
        out / "subsets", cfg.year_cutoff,
    )
    write_report_tables(cov, out)
    render_html_report(cov, out / "report.html")
    outputs = ["coverage.csv", "per_year.csv", "per_type_status.csv", "report.html"]
    outputs += [f"subsets/{name}.csv" for name in cov.subset_sizes]
    inputs.update(params)
    counters = {"eligible_records": cov.eligible_records, "matched_records": cov.matched_count, **cov.subset_sizes}
    write_manifest(out, "report", inputs, outputs, counters)
    return counters


STAGE_FUNCS = {"convert": convert, "analyze": analyze, "map-meta": map_meta, "map-index": map_index, "report": report}


def run_all(cfg: RunConfig) -> dict:
    return {stage: STAGE_FUNCS[stage](cfg) for stage in STAGES}
