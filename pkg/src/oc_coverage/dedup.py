"""Collapsing duplicate Meta entities matched by one IRIS record into a canonical entity."""

from __future__ import annotations

import csv
from collections.abc import Iterable
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path

from .meta_matcher import MetaMatch, PartialDate, parse_partial_date


def date_granularity_rank(date: PartialDate | None) -> int:
    if date is None:
        return 0
    if date.month is None:
        return 1
    if date.day is None:
        return 2
    return 3


def omid_order_key(omid: str) -> str:
    # Plain text comparison; the single place to change if OMIDs should compare numerically.
    return omid


@dataclass(frozen=True)
class CanonicalMatch:
    item_id: str
    canonical_omid: str
    all_omids: frozenset[str]
    pub_date: str


def select_canonical_match(matches: Iterable[MetaMatch]) -> CanonicalMatch:
    """Best-dated candidate; ties resolved by the greatest OMID (descending order, first entry)."""
    best_date: dict[str, tuple[int, str]] = {}
    item_id = None
    for m in matches:
        if item_id is None:
            item_id = m.item_id
        elif m.item_id != item_id:
            raise ValueError(f"matches for several records: {item_id!r}, {m.item_id!r}")
        scored = (date_granularity_rank(parse_partial_date(m.pub_date)), m.pub_date)
        # duplicated dump rows for one OMID keep their most complete date
        if m.omid not in best_date or scored > best_date[m.omid]:
            best_date[m.omid] = scored
    if item_id is None:
        raise ValueError("select_canonical_match needs at least one match")
    top_rank = max(rank for rank, _ in best_date.values())
    candidates = [omid for omid, (rank, _) in best_date.items() if rank == top_rank]
    canonical = max(candidates, key=omid_order_key)
    return CanonicalMatch(item_id, canonical, frozenset(best_date), best_date[canonical][1])


def dedup_matches(matches: Iterable[MetaMatch]) -> list[CanonicalMatch]:
    """One CanonicalMatch per matched item_id, in item_id order."""
    ordered = sorted(matches, key=lambda m: m.item_id)
    return [select_canonical_match(group) for _, group in groupby(ordered, key=lambda m: m.item_id)]


CANONICAL_COLUMNS = ("item_id", "canonical_omid", "omid_count", "pub_date")


def write_canonical_matches(canon: Iterable[CanonicalMatch], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_COLUMNS)
        for c in canon:
            writer.writerow([c.item_id, c.canonical_omid, len(c.all_omids), c.pub_date])


def read_canonical_matches(path: str | Path, matches: Iterable[MetaMatch]) -> list[CanonicalMatch]:
    """Rebuild CanonicalMatch objects; ``all_omids`` comes from the pre-dedup match file."""
    omids: dict[str, set[str]] = {}
    for m in matches:
        omids.setdefault(m.item_id, set()).add(m.omid)
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            all_omids = frozenset(omids.get(r["item_id"], ())) | {r["canonical_omid"]}
            out.append(CanonicalMatch(r["item_id"], r["canonical_omid"], all_omids, r["pub_date"]))
    return out
