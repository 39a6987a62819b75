"""Brute-force reference computation over raw fixture files.

Shares no code with the package: identifiers are checked with isbnlib and
hand-written rules, matching is a nested loop over records x PIDs x dump rows,
and citation totals are recounted link by link.
"""

from __future__ import annotations

import csv
import datetime
import gzip
import io
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import isbnlib

BOOK_TYPES = {
    "monograph or scientific treatise",
    "concordance",
    "critical edition",
    "publication of unpublished sources",
    "scientific commentary",
    "book translation",
    "editorship",
}


def oracle_doi(raw: str) -> str | None:
    s = raw.strip()
    for prefix in ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:"):
        if s.lower().startswith(prefix):
            s = s[len(prefix):].strip()
            break
    s = s.lower()
    if not s.startswith("10."):
        return None
    registrant, slash, suffix = s[3:].partition("/")
    if not slash or not suffix or any(ch.isspace() for ch in suffix):
        return None
    parts = registrant.split(".")
    if not all(p and all(c in "0123456789" for c in p) for p in parts):
        return None
    return s


def oracle_pmid(raw: str) -> str | None:
    s = raw.strip()
    if s.lower().startswith("pmid:"):
        s = s[5:].strip()
    if not s or any(c not in "0123456789" for c in s):
        return None
    n = int(s)
    return str(n) if 1 <= n <= 99_999_999 else None


def oracle_isbn(raw: str) -> str | None:
    s = raw.replace("-", "").replace(" ", "").strip()
    if not s or any(c not in "0123456789Xx" for c in s):
        return None
    s = s.upper()
    # isbnlib's check-digit routines only; its is_isbn* also reject placeholder codes like 0000000000
    if len(s) == 10 and "X" not in s[:9] and isbnlib.check_digit10(s[:9]) == s[9]:
        return s
    if len(s) == 13 and "X" not in s and s[:3] in ("978", "979") and isbnlib.check_digit13(s[:12]) == s[12]:
        return s
    return None


CHECK = {"doi": oracle_doi, "pmid": oracle_pmid, "isbn": oracle_isbn}
FIELD_SCHEME = {
    "IDE_DOI": "doi", "IDE_PMID": "pmid", "IDE_ISBN": "isbn", "IDE_ISBN_1": "isbn",
    "IDE_ISBN_2": "isbn", "IDE_ISBN_3": "isbn", "IDE_EISBN": "isbn",
}


def forms(scheme: str, value: str) -> list[tuple[str, str]]:
    out = [(scheme, value)]
    if scheme == "isbn" and len(value) == 10:
        out.append(("isbn", isbnlib.to_isbn13(value)))
    return out


def date_rank(text: str) -> int:
    for fmt, n, rank in (("%Y-%m-%d", 10, 3), ("%Y-%m", 7, 2), ("%Y", 4, 1)):
        if len(text) == n and re.fullmatch(r"[0-9-]+", text):
            try:
                datetime.datetime.strptime(text, fmt)
            except ValueError:
                return 0
            return rank
    return 0


@dataclass
class OracleResult:
    eligible: set[str] = field(default_factory=set)
    retained: dict[str, set[tuple[str, str]]] = field(default_factory=dict)
    valid_counts: dict[str, int] = field(default_factory=dict)
    misassigned: int = 0
    final_list: int = 0
    matches: set[tuple[str, str]] = field(default_factory=set)  # (item, omid)
    canonical: dict[str, str] = field(default_factory=dict)
    all_omids: dict[str, set[str]] = field(default_factory=dict)
    outgoing: int = 0
    incoming: int = 0
    internal: int = 0
    per_record: dict[str, tuple[int, int]] = field(default_factory=dict)
    subsets: dict[str, set[str]] = field(default_factory=dict)


def _read_dump_rows(dump: Path) -> list[list[str]]:
    rows = []
    for path in sorted(dump.iterdir()):
        blobs = []
        if path.suffix == ".zip":
            with zipfile.ZipFile(path) as zf:
                blobs = [zf.read(n) for n in zf.namelist()]
        elif path.name.endswith(".gz"):
            blobs = [gzip.decompress(path.read_bytes())]
        else:
            blobs = [path.read_bytes()]
        for blob in blobs:
            reader = csv.reader(io.StringIO(blob.decode("utf-8")))
            header = next(reader)
            rows.extend([header] + list(reader))
    return rows


def compute(iris_dir: Path, mapping_file: Path, meta_dump: Path, index_dump: Path, cutoff: int = 2024) -> OracleResult:
    res = OracleResult()
    with open(mapping_file, encoding="utf-8") as fh:
        mapping = {r["raw_type"].strip().lower(): r["miur_type"] for r in csv.DictReader(fh)}
    with open(iris_dir / "master.csv", encoding="utf-8") as fh:
        master = list(csv.DictReader(fh))
    with open(iris_dir / "identifiers.csv", encoding="utf-8") as fh:
        id_rows = list(csv.DictReader(fh))

    valid = {"doi": 0, "pmid": 0, "isbn": 0}
    types = {}
    for m in master:
        item = m["ITEM_ID"]
        y = m["DATE_ISSUED_YEAR"].strip()
        year = int(y) if len(y) == 4 and y.isdigit() else None
        if year is None or year <= cutoff:
            res.eligible.add(item)
        types[item] = mapping.get(m["OWNING_COLLECTION_DES"].strip().lower(), "other")
        found = set()
        for row in id_rows:
            if row["ITEM_ID"] != item:
                continue
            for fld, scheme in FIELD_SCHEME.items():
                if row[fld].strip():
                    value = CHECK[scheme](row[fld])
                    if value is not None:
                        found.add((scheme, value))
        for scheme, _ in found:
            valid[scheme] += 1
        kept = {p for p in found if p[0] != "isbn" or types[item] in BOOK_TYPES}
        res.misassigned += len(found) - len(kept)
        res.final_list += len(kept)
        res.retained[item] = kept
    res.valid_counts = valid

    # Meta: every eligible record's PIDs against every token of every row
    meta = _read_dump_rows(meta_dump)
    header = meta[0]
    matched_dates: dict[str, list[tuple[str, str]]] = {}
    for row in meta:
        if row == header or len(row) != len(header):
            continue
        tokens = row[0].split(" ")
        omid = next((t for t in tokens if t.startswith("omid:")), None)
        if omid is None:
            continue
        row_ids = []
        for t in tokens:
            scheme, _, value = t.partition(":")
            if scheme in CHECK:
                v = CHECK[scheme](value)
                if v is not None:
                    row_ids.extend(forms(scheme, v))
        for item in sorted(res.eligible):
            for scheme, value in res.retained[item]:
                for f in forms(scheme, value):
                    for rid in row_ids:
                        if f == rid:
                            date = row[3].strip()
                            matched_dates.setdefault(item, []).append((omid, date if date_rank(date) else ""))
    for item, pairs in matched_dates.items():
        best = {}
        for omid, date in pairs:
            res.matches.add((item, omid))
            cand = (date_rank(date), date)
            if omid not in best or cand > best[omid]:
                best[omid] = cand
        ordered = sorted(best, key=lambda o: (best[o][0], o), reverse=True)
        res.canonical[item] = ordered[0]
        res.all_omids[item] = set(best)

    # Index
    index = _read_dump_rows(index_dump)
    links: dict[str, tuple[str, str]] = {}
    for row in index:
        if row[0] == "oci" or len(row) < 3 or not row[0].strip():
            continue
        c = row[1].strip()
        d = row[2].strip()
        c = c if c.startswith("omid:") else "omid:" + c
        d = d if d.startswith("omid:") else "omid:" + d
        involved = any(c in oms or d in oms for oms in res.all_omids.values())
        if involved:
            oci = row[0].strip()
            if oci not in links or (c, d) < links[oci]:
                links[oci] = (c, d)

    def owners(omid: str) -> tuple[str, ...]:
        return tuple(sorted(x for x, oms in res.all_omids.items() if omid in oms))

    def key(omid: str):
        o = owners(omid)
        return ("record", o) if o else ("omid", omid)

    out_set, in_set, int_set = set(), set(), set()
    per_out = {x: set() for x in res.all_omids}
    per_in = {x: set() for x in res.all_omids}
    for oci, (c, d) in links.items():
        oc, od = owners(c), owners(d)
        if oc:
            out_set.add((key(c), key(d)))
        if od:
            in_set.add((key(c), key(d)))
        if oc and od and any(a != b for a in oc for b in od):
            int_set.add((key(c), key(d)))
        for x, oms in res.all_omids.items():
            if c in oms:
                per_out[x].add(key(d))
            if d in oms:
                per_in[x].add(key(c))
    res.outgoing, res.incoming, res.internal = len(out_set), len(in_set), len(int_set)
    res.per_record = {x: (len(per_out[x]), len(per_in[x])) for x in res.all_omids if per_out[x] or per_in[x]}

    found = set(res.canonical)
    res.subsets = {
        "found_in_meta": found,
        "not_found_in_meta": {x for x in res.eligible if x not in found and res.retained[x]},
        "no_pids": {x for x in res.eligible if x not in found and not res.retained[x]},
        "found_in_index": {x for x in found if x in res.per_record},
    }
    return res
