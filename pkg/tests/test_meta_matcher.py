import csv
import gzip
import logging

import pytest

from oc_coverage import dumps
from oc_coverage.meta_matcher import (
    META_COLUMNS,
    MetaMatch,
    NoOmid,
    PartialDate,
    parse_meta_id_cell,
    parse_partial_date,
    read_meta_matches,
    scan_meta_dump,
    write_meta_matches,
)
from oc_coverage.pids import Pid, PidIndex


def write_dump(path, rows, name="meta_000.csv", header=META_COLUMNS):
    path.mkdir(parents=True, exist_ok=True)
    with open(path / name, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def row(cell, date="2020", typ="journal article"):
    return [cell, "T", "", date, "", "", "", "", typ, "", ""]


def test_parse_id_cell():
    assert parse_meta_id_cell("omid:br/0612345 doi:10.1162/qss_a_00292") == (
        "omid:br/0612345", {Pid("doi", "10.1162/qss_a_00292")})
    assert parse_meta_id_cell("omid:br/061 isbn:9783161484100 issn:1234-5675") == (
        "omid:br/061", {Pid("isbn", "9783161484100")})
    assert parse_meta_id_cell("doi:10.1/X omid:br/1 omid:br/2 pmid:007") == (
        "omid:br/1", {Pid("doi", "10.1/x"), Pid("pmid", "7")})
    with pytest.raises(NoOmid):
        parse_meta_id_cell("doi:10.1/x")


@pytest.mark.parametrize("text,expected", [
    ("2020-03", PartialDate(2020, 3)),
    ("2020", PartialDate(2020)),
    ("2020-03-14", PartialDate(2020, 3, 14)),
    ("", None),
    (None, None),
    ("2020-13", None),
    ("2021-02-29", None),
    ("2020-02-29", PartialDate(2020, 2, 29)),
    ("20", None),
    ("2020/03", None),
])
def test_partial_date(text, expected):
    assert parse_partial_date(text) == expected


def test_empty_dump(tmp_path):
    (tmp_path / "meta").mkdir()
    assert scan_meta_dump(tmp_path / "meta", PidIndex()).matches == []


def test_thousand_rows_thirteen_matches(tmp_path):
    """12 rows carry indexed PIDs, one of them shared by two records."""
    index = PidIndex()
    rows = []
    for k in range(12):
        pid = Pid("doi", f"10.1000/hit{k}")
        index.add(pid, f"item{k}")
        rows.append(row(f"omid:br/06{k:04d} doi:10.1000/hit{k}"))
    index.add(Pid("doi", "10.1000/hit0"), "item_shared")
    for k in range(988):
        rows.append(row(f"omid:br/07{k:04d} doi:10.2000/miss{k}"))
    write_dump(tmp_path / "meta", rows)
    scan = scan_meta_dump(tmp_path / "meta", index)
    assert len(scan.matches) == 13
    assert scan.counters["rows"] == 1000
    assert {m.item_id for m in scan.matches if m.omid == "omid:br/060000"} == {"item0", "item_shared"}


def test_isbn_forms_and_case(tmp_path):
    index = PidIndex()
    index.add(Pid("isbn", "0306406152"), "ten")
    index.add(Pid("isbn", "9783161484100"), "thirteen")
    index.add(Pid("doi", "10.1/abc"), "doi")
    write_dump(tmp_path / "meta", [
        row("omid:br/1 isbn:9780306406157"),
        row("isbn:978-3-16-148410-0 omid:br/2"),
        row("omid:br/3 doi:10.1/ABC"),
    ])
    got = {(m.item_id, m.omid) for m in scan_meta_dump(tmp_path / "meta", index).matches}
    assert got == {("ten", "omid:br/1"), ("thirteen", "omid:br/2"), ("doi", "omid:br/3")}


def test_counters_and_bad_rows(tmp_path, caplog):
    index = PidIndex()
    index.add(Pid("doi", "10.1/a"), "a")
    write_dump(tmp_path / "meta", [
        row("doi:10.1/a"),
        ["omid:br/9 doi:10.1/a", "short"],
        row("omid:br/1 doi:10.1/a", date="2020-13"),
    ])
    (tmp_path / "meta" / "meta_001.csv.gz").write_bytes(b"not gzip at all")
    with caplog.at_level(logging.ERROR):
        scan = scan_meta_dump(tmp_path / "meta", index)
    assert scan.counters["no_omid_rows"] == 1
    assert scan.counters["malformed_rows"] == 1
    assert scan.counters["invalid_dates"] == 1
    assert scan.counters["unreadable_files"] == 1
    assert scan.matches == [MetaMatch("a", "omid:br/1", Pid("doi", "10.1/a"), "", "journal article")]


def test_header_preflight(tmp_path):
    write_dump(tmp_path / "meta", [["omid:br/1", "x"]], header=("identifier", "title"))
    with pytest.raises(dumps.DumpLayoutError):
        scan_meta_dump(tmp_path / "meta", PidIndex())
    custom = {"id": "identifier", "title": "title", "pub_date": "title", "type": "title"}
    assert scan_meta_dump(tmp_path / "meta", PidIndex(), custom).matches == []


def test_gzip_and_shard_independence(tmp_path):
    index = PidIndex()
    rows = []
    for k in range(60):
        index.add(Pid("pmid", str(k + 1)), f"i{k % 7}")
        rows.append(row(f"omid:br/{k} pmid:{k + 1}", date=("2020", "2020-01", "")[k % 3]))
    d = tmp_path / "meta"
    for part in range(3):
        write_dump(d, rows[part::3], name=f"m{part}.csv")
    gz = d / "m2.csv"
    (d / "m2.csv.gz").write_bytes(gzip.compress(gz.read_bytes()))
    gz.unlink()
    results = [scan_meta_dump(d, index, shards=s).matches for s in (1, 2, 8)]
    assert len(results[0]) == 60
    assert results[0] == results[1] == results[2]


def test_matches_roundtrip(tmp_path):
    ms = [MetaMatch("a", "omid:br/1", Pid("isbn", "080442957X"), "2020-01", "book")]
    write_meta_matches(ms, tmp_path / "m.csv")
    assert read_meta_matches(tmp_path / "m.csv") == ms
