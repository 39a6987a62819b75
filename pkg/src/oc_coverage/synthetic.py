"""Deterministic synthetic IRIS export plus Meta and Index dumps for tests and benchmarks.

The data deliberately contains the awkward cases seen in real exports: invalid
and prefixed identifiers, ISBNs on chapters and articles, container ISBNs
shared by several records, ISBN-10/13 form mismatches between IRIS and Meta,
undated and post-cutoff records, duplicate Meta entities with mixed date
granularity, duplicate OCIs, internal citations and malformed dump rows.
"""

from __future__ import annotations

import csv
import gzip
import io
import random
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from .index_matcher import INDEX_COLUMNS
from .iris_ingest import DEFAULT_FILES, TABLE_COLUMNS
from .meta_matcher import META_COLUMNS
from .pids import isbn10_check_digit, isbn13_check_digit

# raw IRIS collection label -> MIUR type, as an institution's mapping file would state it
RAW_TYPES = {
    "Articolo in rivista": "journal article",
    "Contributo in volume": "book chapter",
    "Contributo in Atti di convegno": "proceedings paper",
    "Monografia o trattato scientifico": "monograph or scientific treatise",
    "Curatela": "editorship",
    "Edizione critica": "critical edition",
    "Traduzione di libro": "book translation",
    "Commento scientifico": "scientific commentary",
    "Concordanza": "concordance",
    "Pubblicazione di fonti inedite": "publication of unpublished sources",
    "Banca dati": "database",
    "Brevetto": "patent",
    "Altro": "other",
}
UNMAPPED_TYPES = ("Tesi di dottorato", "PhD thesis", "")
TYPE_WEIGHTS = {
    "Articolo in rivista": 30,
    "Contributo in volume": 14,
    "Contributo in Atti di convegno": 12,
    "Monografia o trattato scientifico": 8,
    "Curatela": 5,
    "Edizione critica": 2,
    "Traduzione di libro": 2,
    "Commento scientifico": 1,
    "Concordanza": 1,
    "Pubblicazione di fonti inedite": 1,
    "Banca dati": 2,
    "Brevetto": 2,
    "Altro": 2,
    "Tesi di dottorato": 3,
    "PhD thesis": 2,
    "": 1,
}
BOOKISH = {k for k, v in RAW_TYPES.items() if v in {
    "monograph or scientific treatise", "editorship", "critical edition", "book translation",
    "scientific commentary", "concordance", "publication of unpublished sources",
}}
ARTICLE_LIKE = {"Articolo in rivista", "Contributo in Atti di convegno", "Contributo in volume", "Banca dati"}


@dataclass
class Fixture:
    root: Path
    iris_dir: Path
    mapping: Path
    meta_dump: Path
    index_dump: Path
    n_records: int = 0
    n_meta_rows: int = 0
    n_index_rows: int = 0
    tables: dict[str, list[list[str]]] = field(default_factory=dict)
    meta_rows: list[list[str]] = field(default_factory=list)
    index_rows: list[list[str]] = field(default_factory=list)


def random_isbn13(rng: random.Random) -> str:
    first = rng.choice(("978", "979")) + "".join(rng.choice("0123456789") for _ in range(9))
    return first + isbn13_check_digit(first)


def random_isbn10(rng: random.Random) -> str:
    first = "".join(rng.choice("0123456789") for _ in range(9))
    return first + isbn10_check_digit(first)


def isbn13_to_10(value: str) -> str | None:
    if not value.startswith("978"):
        return None
    first = value[3:12]
    return first + isbn10_check_digit(first)


def corrupt_check_digit(value: str) -> str:
    last = value[-1]
    repl = "0" if last in "X9" else str(int(last) + 1)
    return value[:-1] + repl


def hyphenate(value: str) -> str:
    if len(value) == 13:
        return f"{value[:3]}-{value[3]}-{value[4:7]}-{value[7:12]}-{value[12]}"
    return f"{value[0]}-{value[1:4]}-{value[4:9]}-{value[9]}"


class _Omids:
    def __init__(self, rng: random.Random):
        self.n = 0
        self.rng = rng

    def new(self) -> str:
        self.n += 1
        # a few shorter suffixes so that text and numeric order disagree
        if self.rng.random() < 0.05:
            return f"omid:br/06{self.n}"
        return f"omid:br/0610{self.n:06d}"


def generate(root: str | Path, seed: int = 0, n_records: int = 300, n_meta_noise: int = 900,
             n_index_noise: int = 8000) -> Fixture:
    rng = random.Random(seed)
    root = Path(root)
    fx = Fixture(root, root / "iris", root / "type_mapping.csv", root / "meta", root / "index")

    # -- IRIS export ---------------------------------------------------------
    shared_isbns = [random_isbn13(rng) for _ in range(8)]
    master, identifiers, authors, language, publisher, relation, actors = [], [], [], [], [], [], []
    record_pids: dict[str, list[tuple[str, str]]] = {}  # item -> [(scheme, canonical)]
    raw_types = list(TYPE_WEIGHTS)
    weights = list(TYPE_WEIGHTS.values())
    for i in range(n_records):
        item = f"{10000 + i}"
        raw_type = rng.choices(raw_types, weights)[0]
        r = rng.random()
        year = "" if r < 0.08 else ("2025" if r < 0.13 else ("2026" if r < 0.15 else str(rng.randint(1990, 2024))))
        if rng.random() < 0.01:
            year = "20x4"
        master.append([item, year, f"Title of record {i}", f"col{raw_types.index(raw_type)}", raw_type])
        ids = dict.fromkeys(TABLE_COLUMNS["identifiers"][1:], "")
        canon: list[tuple[str, str]] = []
        if raw_type in ARTICLE_LIKE and rng.random() < 0.75:
            doi = f"10.{rng.randint(1000, 9999)}/s{seed}.{i}.{rng.randint(0, 999)}"
            form = rng.random()
            ids["IDE_DOI"] = doi if form < 0.6 else ("https://doi.org/" + doi.upper() if form < 0.8 else "doi:" + doi)
            canon.append(("doi", doi))
        elif rng.random() < 0.04:
            ids["IDE_DOI"] = rng.choice(["not-a-doi", "10.abc", "ISBN 88-06-1234"])
        if raw_type == "Articolo in rivista" and rng.random() < 0.35:
            pmid = str(rng.randint(1, 39_999_999))
            ids["IDE_PMID"] = ("00" + pmid) if rng.random() < 0.1 else pmid
            canon.append(("pmid", pmid))
        elif rng.random() < 0.03:
            ids["IDE_PMID"] = rng.choice(["12a45", "0", "123456789"])
        if raw_type in BOOKISH and rng.random() < 0.85:
            if rng.random() < 0.15:
                isbn = rng.choice(shared_isbns)
            elif rng.random() < 0.3:
                isbn = random_isbn10(rng)
            else:
                isbn = random_isbn13(rng)
            ids["IDE_ISBN"] = hyphenate(isbn) if rng.random() < 0.4 else isbn
            if rng.random() < 0.3:
                ids["IDE_EISBN"] = isbn
            canon.append(("isbn", isbn))
            if rng.random() < 0.1:
                extra = random_isbn13(rng)
                ids["IDE_ISBN_1"] = extra
                canon.append(("isbn", extra))
        elif raw_type in ("Contributo in volume", "Contributo in Atti di convegno", "Articolo in rivista") \
                and rng.random() < 0.35:
            isbn = rng.choice(shared_isbns) if rng.random() < 0.5 else random_isbn13(rng)
            ids["IDE_ISBN"] = isbn
            canon.append(("isbn", isbn))
        if rng.random() < 0.04:
            ids["IDE_ISBN_2"] = corrupt_check_digit(random_isbn13(rng))
        if rng.random() < 0.05:
            ids["IDE_URL"] = f"https://example.org/{i}"
        identifiers.append([item] + list(ids.values()))
        if rng.random() < 0.04:
            # a second identifier row for the same record
            extra_ids = dict.fromkeys(ids, "")
            doi = f"10.5555/extra.{seed}.{i}"
            extra_ids["IDE_DOI"] = doi
            identifiers.append([item] + list(extra_ids.values()))
            canon.append(("doi", doi))
        record_pids[item] = canon
        n_auth = rng.randint(1, 12)
        authors.append([item, "A; B", "A; B", str(n_auth), str(n_auth)])
        if rng.random() < 0.9:
            language.append([item, rng.choice(["eng", "ita", "fre"]), "en"])
        publisher.append([item, "Publisher", "Bologna", "IT", "Italy"])
        relation.append([item, "", "Journal", "1234-5678", str(rng.randint(1, 40))])
        actors.append([item, f"rp{i}", f"p{i}", "", "Name", "Surname", "Bologna"])
    # an identifiers row for a record absent from master, ignored by the join
    identifiers.append(["99999999"] + ["10.1/orphan"] + [""] * (len(TABLE_COLUMNS["identifiers"]) - 2))
    fx.tables = {
        "master": master, "identifiers": identifiers, "author_lists": authors, "language": language,
        "publisher": publisher, "relation": relation, "actors": actors,
    }
    fx.n_records = n_records

    # -- Meta dump -----------------------------------------------------------
    omids = _Omids(rng)
    meta_rows: list[list[str]] = []
    entity_omids: list[str] = []
    entity_of: dict[tuple[str, str], list[str]] = {}
    dup_groups: list[list[str]] = []

    def meta_row(omid: str, tokens: list[str], date: str, typ: str) -> list[str]:
        cell = " ".join([omid] + tokens) if rng.random() < 0.8 else " ".join(tokens + [omid])
        return [cell, "T", "Author, A. [omid:ra/1]", date, "Venue [issn:1234-5678]", "1", "2", "1-10", typ, "Pub", ""]

    date_pool = ("", "2019", "2019", "2019-05", "2019-05-17", "2020-13", "2021-02-30")
    seen_pids: set[tuple[str, str]] = set()
    for item, canon in record_pids.items():
        for scheme, value in canon:
            if (scheme, value) in seen_pids or rng.random() > 0.7:
                continue
            seen_pids.add((scheme, value))
            n_dups = 1 + (rng.random() < 0.2) + (rng.random() < 0.1)
            group = []
            for _ in range(n_dups):
                omid = omids.new()
                group.append(omid)
                shown = value
                if scheme == "isbn":
                    if len(value) == 10 and rng.random() < 0.5:
                        first12 = "978" + value[:9]
                        shown = first12 + isbn13_check_digit(first12)
                    elif len(value) == 13 and rng.random() < 0.3:
                        shown = isbn13_to_10(value) or value
                elif scheme == "doi" and rng.random() < 0.1:
                    shown = value.upper()
                tokens = [f"{scheme}:{shown}"]
                if rng.random() < 0.3:
                    tokens.append("issn:1234-5678")
                meta_row_type = "book" if scheme == "isbn" else "journal article"
                meta_rows.append(meta_row(omid, tokens, rng.choice(date_pool), meta_row_type))
                if rng.random() < 0.05:
                    meta_rows.append(list(meta_rows[-1]))  # exact duplicate row
            entity_omids.extend(group)
            entity_of[(scheme, value)] = group
            if len(group) > 1:
                dup_groups.append(group)
    for _ in range(n_meta_noise):
        omid = omids.new()
        meta_rows.append(meta_row(omid, [f"doi:10.9999/noise.{omids.n}"], rng.choice(date_pool), "journal article"))
    for k in range(5):
        meta_rows.append([f"doi:10.9999/no-omid.{k}", "T", "", "2020", "", "", "", "", "journal article", "", ""])
    malformed = [["omid:br/0619999 doi:10.9999/bad", "too", "few"]] * 3
    meta_rows.extend(malformed)
    fx.meta_rows = meta_rows
    fx.n_meta_rows = len(meta_rows)

    # -- Index dump ----------------------------------------------------------
    external = [f"omid:br/0690{n:06d}" for n in range(2500)]
    index_rows: list[list[str]] = []

    def oci(citing: str, cited: str) -> str:
        return f"06{citing.split('/')[-1]}-06{cited.split('/')[-1]}"

    def cite(citing: str, cited: str) -> None:
        c, d = citing, cited
        if rng.random() < 0.05:
            c = c.removeprefix("omid:")
        if rng.random() < 0.05:
            d = d.removeprefix("omid:")
        index_rows.append([oci(citing, cited), c, d, "2020-01-01", "P1Y", "no", "no"])

    for omid in entity_omids:
        for target in rng.sample(external, rng.randint(0, 8)):
            cite(omid, target)
        for source in rng.sample(external, rng.randint(0, 8)):
            cite(source, omid)
        if rng.random() < 0.15:
            cite(omid, rng.choice(entity_omids))
    for group in dup_groups:
        # the same reference seen from each duplicate entity: distinct OCIs, one logical citation
        target = rng.choice(external)
        for omid in group:
            cite(omid, target)
        if rng.random() < 0.5:
            cite(group[0], group[1])
    for _ in range(n_index_noise):
        a, b = rng.sample(external, 2)
        cite(a, b)
    for row in rng.sample(index_rows, max(1, len(index_rows) // 50)):
        index_rows.append(list(row))
    index_rows.extend([["0612-0613", "omid:br/0612"]] * 2)
    index_rows.append(["", "omid:br/0690000001", "omid:br/0690000002", "", "", "", ""])
    fx.index_rows = index_rows
    fx.n_index_rows = len(index_rows)

    write(fx)
    return fx


def permute(fx: Fixture, seed: int, files: int = 4) -> None:
    """Shuffle every table's rows (and how dump rows spread over files) in place, then rewrite."""
    rng = random.Random(seed)
    for rows in fx.tables.values():
        rng.shuffle(rows)
    rng.shuffle(fx.meta_rows)
    rng.shuffle(fx.index_rows)
    write(fx, files=files)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _chunks(rows: list, n: int) -> list[list]:
    size = -(-len(rows) // n) if rows else 0
    return [rows[i * size:(i + 1) * size] for i in range(n)]


def write(fx: Fixture, files: int = 4) -> None:
    for d in (fx.iris_dir, fx.meta_dump, fx.index_dump):
        d.mkdir(parents=True, exist_ok=True)
        for old in d.iterdir():
            old.unlink()
    for name, rows in fx.tables.items():
        _write_csv(fx.iris_dir / DEFAULT_FILES[name], TABLE_COLUMNS[name], rows)
    mapping = [[raw, miur] for raw, miur in RAW_TYPES.items()]
    _write_csv(fx.mapping, ("raw_type", "miur_type"), mapping)

    # Meta: plain CSVs plus one gzipped part
    for k, chunk in enumerate(_chunks(fx.meta_rows, files)):
        data = _csv_bytes(META_COLUMNS, chunk)
        if k == files - 1:
            with gzip.GzipFile(fx.meta_dump / f"meta_{k:03d}.csv.gz", "wb", mtime=0) as gz:
                gz.write(data)
        else:
            (fx.meta_dump / f"meta_{k:03d}.csv").write_bytes(data)
    # Index: plain CSVs plus a zip that holds the last parts
    parts = _chunks(fx.index_rows, files)
    for k, chunk in enumerate(parts[:-2]):
        (fx.index_dump / f"index_{k:03d}.csv").write_bytes(_csv_bytes(INDEX_COLUMNS, chunk))
    with zipfile.ZipFile(fx.index_dump / "index_rest.zip", "w") as zf:
        for k, chunk in enumerate(parts[-2:], start=len(parts) - 2):
            zf.writestr(f"index_{k:03d}.csv", _csv_bytes(INDEX_COLUMNS, chunk))


def index_pids(n: int, seed: int = 0) -> list[tuple[str, str]]:
    """``n`` distinct canonical (scheme, value) pairs: half DOIs, the rest PMIDs and ISBN-13s."""
    rng = random.Random(seed)
    out: list[tuple[str, str]] = []
    n_doi, n_pmid = n // 2, n // 5
    out += [("doi", f"10.{1000 + k % 9000}/bench.{k}") for k in range(n_doi)]
    out += [("pmid", str(10_000_000 + k)) for k in range(n_pmid)]
    seen: set[str] = set()
    while len(out) < n:
        isbn = random_isbn13(rng)
        if isbn not in seen:
            seen.add(isbn)
            out.append(("isbn", isbn))
    return out


def write_large_meta_dump(dump: str | Path, target_bytes: int, pids: list[tuple[str, str]],
                          files: int = 4, hit_every: int = 50, seed: int = 0) -> int:
    """Write plain Meta CSV parts totalling at least ``target_bytes``; every ``hit_every``-th row
    carries one of ``pids``. Returns the number of data rows."""
    rng = random.Random(seed)
    dump = Path(dump)
    dump.mkdir(parents=True, exist_ok=True)
    per_file = -(-target_bytes // files)
    header = ",".join(META_COLUMNS) + "\n"
    rows = 0
    for k in range(files):
        written = 0
        with open(dump / f"meta_{k:03d}.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(header)
            while written < per_file:
                block = []
                for _ in range(2_000):
                    rows += 1
                    if rows % hit_every == 0:
                        scheme, value = pids[rng.randrange(len(pids))]
                        ident = f"{scheme}:{value}"
                    else:
                        ident = f"doi:10.9999/filler.{rows} openalex:W{rows}"
                    block.append(
                        f'omid:br/06{rows:09d} {ident},"A fairly ordinary title for a generated entity {rows}",'
                        f'"Surname, Name [omid:ra/06{rows:09d} orcid:0000-0002-1825-0097]",2019-0{1 + rows % 9},'
                        f'"Journal of Examples [omid:br/0699 issn:1234-5678]",{rows % 40},{rows % 7},'
                        f"{rows % 300}-{rows % 300 + 12},journal article,\"Publisher [crossref:{rows % 999}]\",\n"
                    )
                text = "".join(block)
                fh.write(text)
                written += len(text)
    return rows
