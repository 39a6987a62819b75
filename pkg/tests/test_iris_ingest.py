import csv
import logging

import pytest
from hypothesis import given, strategies as st

from oc_coverage import synthetic
from oc_coverage.iris_ingest import (
    TABLE_COLUMNS,
    TABLE_NAMES,
    IrisRecord,
    MalformedHeader,
    MissingSpineTable,
    filter_by_year,
    is_eligible,
    join_records,
    load_iris_tables,
    read_records,
    write_records,
)
from oc_coverage.miur import TypeMapping


def write_table(path, name, rows):
    cols = TABLE_COLUMNS[name]
    with open(path / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([row.get(c, "") for c in cols])


@pytest.fixture
def iris(tmp_path):
    write_table(tmp_path, "master", [
        {"ITEM_ID": "A", "DATE_ISSUED_YEAR": "2020", "TITLE": "a", "OWNING_COLLECTION_DES": "Articolo in rivista"},
        {"ITEM_ID": "B", "DATE_ISSUED_YEAR": "", "TITLE": "b", "OWNING_COLLECTION_DES": "PhD thesis"},
    ])
    write_table(tmp_path, "identifiers", [
        {"ITEM_ID": "A", "IDE_DOI": "10.1/a"},
        {"ITEM_ID": "A", "IDE_DOI": "10.1/b", "IDE_PMID": "42"},
        {"ITEM_ID": "Z", "IDE_DOI": "10.1/orphan"},
    ])
    for name in ("actors", "author_lists", "language", "publisher", "relation"):
        write_table(tmp_path, name, [])
    return tmp_path


MAPPING = TypeMapping.from_pairs([("Articolo in rivista", "journal article")])


def test_all_seven_tables(tmp_path):
    fx = synthetic.generate(tmp_path, n_records=50, n_meta_noise=0, n_index_noise=0)
    tables = load_iris_tables(fx.iris_dir)
    assert set(tables.tables) == set(TABLE_NAMES)
    assert len(tables["master"]) == 50
    assert all(len(tables[name]) > 0 for name in TABLE_NAMES)


def test_missing_optional_table_warns(iris, caplog):
    (iris / "language.csv").unlink()
    with caplog.at_level(logging.WARNING):
        tables = load_iris_tables(iris)
    assert tables["language"] == []
    assert "language" in caplog.text


@pytest.mark.parametrize("spine", ["master", "identifiers"])
def test_missing_spine_table_fatal(iris, spine):
    (iris / f"{spine}.csv").unlink()
    with pytest.raises(MissingSpineTable):
        load_iris_tables(iris)


def test_malformed_header(iris):
    (iris / "master.csv").write_text("ITEM_ID,TITLE\nA,x\n", encoding="utf-8")
    with pytest.raises(MalformedHeader):
        load_iris_tables(iris)


def test_bom_and_renamed_columns(iris):
    text = (iris / "master.csv").read_text(encoding="utf-8").replace("DATE_ISSUED_YEAR", "ANNO")
    (iris / "master.csv").write_text("﻿" + text, encoding="utf-8")
    (iris / "master.csv").rename(iris / "items.csv")
    tables = load_iris_tables(iris, {"master": "items.csv"}, {"master": {"DATE_ISSUED_YEAR": "ANNO"}})
    assert tables["master"][0]["DATE_ISSUED_YEAR"] == "2020"


def test_bad_rows_skipped_and_counted(iris):
    with open(iris / "identifiers.csv", "a", encoding="utf-8") as fh:
        fh.write("A,too,short\n")
        fh.write("," * (len(TABLE_COLUMNS["identifiers"]) - 1) + "\n")
    tables = load_iris_tables(iris)
    assert tables.skipped_rows["identifiers"] == 2
    assert all(r["ITEM_ID"] for r in tables["identifiers"])


def test_join_outer_and_union(iris):
    records = join_records(load_iris_tables(iris), MAPPING)
    assert [r.item_id for r in records] == ["A", "B"]
    a, b = records
    assert a.raw_ids["IDE_DOI"] == ("10.1/a", "10.1/b")
    assert a.raw_ids["IDE_PMID"] == ("42",)
    assert b.raw_ids == {}
    assert a.miur_type == "journal article"
    assert b.miur_type == "other"
    assert a.year == 2020 and b.year is None


def test_join_deterministic_and_roundtrip(iris, tmp_path):
    first = join_records(load_iris_tables(iris), MAPPING)
    assert join_records(load_iris_tables(iris), MAPPING) == first
    write_records(first, tmp_path / "r.csv")
    assert read_records(tmp_path / "r.csv") == first


def test_record_count_equals_distinct_master_ids(tmp_path):
    fx = synthetic.generate(tmp_path, n_records=120, n_meta_noise=0, n_index_noise=0)
    records = join_records(load_iris_tables(fx.iris_dir), TypeMapping.load(fx.mapping))
    assert len(records) == 120
    assert len({r.item_id for r in records}) == 120


def rec(year):
    return IrisRecord("x", "", year, "", "other", {})


@pytest.mark.parametrize("year,kept", [(2024, True), (2025, False), (None, True), (1990, True)])
def test_year_cutoff(year, kept):
    k, e = filter_by_year([rec(year)], 2024)
    assert (len(k), len(e)) == ((1, 0) if kept else (0, 1))
    assert is_eligible(rec(year), 2024) is kept


def test_cutoff_range():
    with pytest.raises(ValueError):
        filter_by_year([], 999)


@given(st.lists(st.one_of(st.none(), st.integers(1000, 2100))), st.integers(1000, 2100))
def test_year_partition(years, cutoff):
    records = [IrisRecord(str(i), "", y, "", "other", {}) for i, y in enumerate(years)]
    kept, excluded = filter_by_year(records, cutoff)
    assert len(kept) + len(excluded) == len(records)
    assert {r.item_id for r in kept}.isdisjoint(r.item_id for r in excluded)
    assert all(r.year is not None and r.year > cutoff for r in excluded)
