"""Persistent identifier normalization, record-level extraction and the institution PID index."""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import NamedTuple

from .iris_ingest import ISBN_FIELDS, IrisRecord
from .miur import ISBN_COMPATIBLE_TYPES

SCHEMES = ("doi", "pmid", "isbn")


class Pid(NamedTuple):
    scheme: str
    value: str

    def __str__(self) -> str:
        return f"{self.scheme}:{self.value}"

    @classmethod
    def parse(cls, text: str) -> Pid:
        scheme, _, value = text.partition(":")
        return cls(scheme, value)


class InvalidPid(ValueError):
    """Raised by the normalizers; ``reason`` is one of the enumerated rejection reasons."""

    def __init__(self, scheme: str, reason: str, raw: str):
        super().__init__(f"invalid {scheme} ({reason}): {raw!r}")
        self.scheme = scheme
        self.reason = reason
        self.raw = raw


_DOI_PREFIXES = ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:")
_DOI_RE = re.compile(r"10\.[0-9]+(?:\.[0-9]+)*/\S+")
_DIGITS_RE = re.compile(r"[0-9]+")
_ISBN10_RE = re.compile(r"[0-9]{9}[0-9X]")
_ISBN13_RE = re.compile(r"97[89][0-9]{10}")


def _strip_prefix(text: str, prefixes: tuple[str, ...]) -> str:
    lowered = text.lower()
    for prefix in prefixes:
        if lowered.startswith(prefix):
            return text[len(prefix):].strip()
    return text


def normalize_doi(raw: str) -> Pid:
    text = raw.strip()
    if not text:
        raise InvalidPid("doi", "empty", raw)
    text = _strip_prefix(text, _DOI_PREFIXES).lower()
    if not _DOI_RE.fullmatch(text):
        raise InvalidPid("doi", "no-doi-pattern", raw)
    return Pid("doi", text)


def normalize_pmid(raw: str) -> Pid:
    text = _strip_prefix(raw.strip(), ("pmid:",))
    if not text:
        raise InvalidPid("pmid", "empty", raw)
    if not _DIGITS_RE.fullmatch(text):
        raise InvalidPid("pmid", "non-numeric", raw)
    text = text.lstrip("0")
    if not text or len(text) > 8:
        raise InvalidPid("pmid", "out-of-range", raw)
    return Pid("pmid", text)


def isbn10_check_digit(first9: str) -> str:
    total = sum((10 - i) * int(d) for i, d in enumerate(first9))
    check = (11 - total % 11) % 11
    return "X" if check == 10 else str(check)


def isbn13_check_digit(first12: str) -> str:
    total = sum(int(d) * (3 if i % 2 else 1) for i, d in enumerate(first12))
    return str((10 - total % 10) % 10)


def normalize_isbn(raw: str) -> Pid:
    """Strip hyphens/spaces and validate an ISBN-10 or ISBN-13.

    Codes of the right length carrying non-digits, a wrong prefix or a wrong
    check digit are all rejected as ``bad-checksum``.
    """
    text = raw.replace("-", "").replace(" ", "").strip()
    if not text:
        raise InvalidPid("isbn", "empty", raw)
    if text[-1] == "x":
        text = text[:-1] + "X"
    if len(text) == 10:
        if _ISBN10_RE.fullmatch(text) and isbn10_check_digit(text[:9]) == text[9]:
            return Pid("isbn", text)
    elif len(text) == 13:
        if _ISBN13_RE.fullmatch(text) and isbn13_check_digit(text[:12]) == text[12]:
            return Pid("isbn", text)
    else:
        raise InvalidPid("isbn", "bad-length", raw)
    raise InvalidPid("isbn", "bad-checksum", raw)


NORMALIZERS = {"doi": normalize_doi, "pmid": normalize_pmid, "isbn": normalize_isbn}


def isbn10_to_13(value: str) -> str:
    first12 = "978" + value[:9]
    return first12 + isbn13_check_digit(first12)


def match_forms(pid: Pid) -> tuple[Pid, ...]:
    """The identifier plus its ISBN-13 alias when ``pid`` is an ISBN-10."""
    if pid.scheme == "isbn" and len(pid.value) == 10:
        return pid, Pid("isbn", isbn10_to_13(pid.value))
    return (pid,)


FIELD_SCHEMES = {"IDE_DOI": "doi", "IDE_PMID": "pmid", **{f: "isbn" for f in ISBN_FIELDS}}


@dataclass(frozen=True)
class RecordPids:
    """Outcome of normalizing one record's identifier fields."""

    item_id: str
    pids: frozenset[Pid]
    raw_counts: Counter
    rejections: Counter  # (scheme, reason) -> n


def extract_record_pids(record: IrisRecord) -> RecordPids:
    pids: set[Pid] = set()
    raw_counts: Counter = Counter()
    rejections: Counter = Counter()
    for fld, values in record.raw_ids.items():
        scheme = FIELD_SCHEMES.get(fld)
        if scheme is None:
            continue
        for raw in values:
            if not raw.strip():
                continue
            raw_counts[scheme] += 1
            try:
                pids.add(NORMALIZERS[scheme](raw))
            except InvalidPid as exc:
                rejections[scheme, exc.reason] += 1
    return RecordPids(record.item_id, frozenset(pids), raw_counts, rejections)


def apply_isbn_type_filter(pids: Iterable[Pid], miur_type: str) -> tuple[frozenset[Pid], int]:
    """Drop ISBNs from records whose type is not book-like; returns (retained, dropped count)."""
    pids = frozenset(pids)
    if miur_type in ISBN_COMPATIBLE_TYPES:
        return pids, 0
    retained = frozenset(p for p in pids if p.scheme != "isbn")
    return retained, len(pids) - len(retained)


@dataclass(frozen=True)
class FilteredRecord:
    item_id: str
    extraction: RecordPids
    retained: frozenset[Pid]
    misassigned: int


def process_record(record: IrisRecord) -> FilteredRecord:
    extraction = extract_record_pids(record)
    retained, misassigned = apply_isbn_type_filter(extraction.pids, record.miur_type)
    return FilteredRecord(record.item_id, extraction, retained, misassigned)


@dataclass
class PidExtractionSummary:
    total_records: int = 0
    records_with_pids: int = 0
    raw: Counter = field(default_factory=Counter)
    valid: Counter = field(default_factory=Counter)
    misassigned_isbns: int = 0
    final_pid_list_size: int = 0
    rejections: Counter = field(default_factory=Counter)

    @property
    def total_pids_extracted(self) -> int:
        return sum(self.raw[s] for s in SCHEMES)

    def __add__(self, other: PidExtractionSummary) -> PidExtractionSummary:
        return PidExtractionSummary(
            self.total_records + other.total_records,
            self.records_with_pids + other.records_with_pids,
            self.raw + other.raw,
            self.valid + other.valid,
            self.misassigned_isbns + other.misassigned_isbns,
            self.final_pid_list_size + other.final_pid_list_size,
            self.rejections + other.rejections,
        )

    def rows(self) -> list[tuple[str, int]]:
        """Label/value rows in the order of the published PID summary."""
        return [
            ("Total records", self.total_records),
            ("Records with PIDs", self.records_with_pids),
            ("Total PIDs extracted", self.total_pids_extracted),
            ("PID by type (DOI)", self.raw["doi"]),
            ("PID by type (PMID)", self.raw["pmid"]),
            ("PID by type (ISBN)", self.raw["isbn"]),
            ("Valid PIDs (DOI)", self.valid["doi"]),
            ("Valid PIDs (PMID)", self.valid["pmid"]),
            ("Valid PIDs (ISBN)", self.valid["isbn"]),
            ("Misassigned ISBNs", self.misassigned_isbns),
            ("Final PID list size", self.final_pid_list_size),
        ]

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, int]]) -> PidExtractionSummary:
        d = dict(rows)
        return cls(
            total_records=d["Total records"],
            records_with_pids=d["Records with PIDs"],
            raw=Counter({s: d[f"PID by type ({s.upper()})"] for s in SCHEMES}),
            valid=Counter({s: d[f"Valid PIDs ({s.upper()})"] for s in SCHEMES}),
            misassigned_isbns=d["Misassigned ISBNs"],
            final_pid_list_size=d["Final PID list size"],
        )


def final_list_size(valid_doi: int, valid_pmid: int, valid_isbn: int, misassigned: int) -> int:
    return valid_doi + valid_pmid + valid_isbn - misassigned


class PidIndex:
    """Pid -> item_ids and item_id -> Pids; ISBN-10s are also indexed under their ISBN-13 form."""

    def __init__(self) -> None:
        self.forward: dict[Pid, set[str]] = {}
        self.reverse: dict[str, set[Pid]] = {}

    def add(self, pid: Pid, item_id: str) -> None:
        for form in match_forms(pid):
            self.forward.setdefault(form, set()).add(item_id)
            self.reverse.setdefault(item_id, set()).add(form)

    def lookup(self, pid: Pid) -> set[str]:
        return self.forward.get(pid, set())

    def pids(self, item_id: str) -> set[Pid]:
        return self.reverse.get(item_id, set())

    def merge(self, other: PidIndex) -> PidIndex:
        for pid, items in other.forward.items():
            self.forward.setdefault(pid, set()).update(items)
        for item, pids in other.reverse.items():
            self.reverse.setdefault(item, set()).update(pids)
        return self

    def __contains__(self, pid: Pid) -> bool:
        return pid in self.forward

    def __len__(self) -> int:
        return len(self.forward)

    def __iter__(self) -> Iterator[Pid]:
        return iter(self.forward)


def build_pid_index(records: Iterable[FilteredRecord]) -> tuple[PidIndex, PidExtractionSummary]:
    index = PidIndex()
    summary = PidExtractionSummary()
    for rec in records:
        summary.total_records += 1
        ex = rec.extraction
        if any(ex.raw_counts[s] for s in SCHEMES):
            summary.records_with_pids += 1
        summary.raw.update(ex.raw_counts)
        summary.valid.update(p.scheme for p in ex.pids)
        summary.rejections.update(ex.rejections)
        summary.misassigned_isbns += rec.misassigned
        summary.final_pid_list_size += len(rec.retained)
        for pid in rec.retained:
            index.add(pid, rec.item_id)
    for s in SCHEMES:
        summary.raw.setdefault(s, 0)
        summary.valid.setdefault(s, 0)
    return index, summary
