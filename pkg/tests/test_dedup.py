import pytest
from hypothesis import given, strategies as st

from oc_coverage.dedup import (
    date_granularity_rank,
    dedup_matches,
    read_canonical_matches,
    select_canonical_match,
    write_canonical_matches,
)
from oc_coverage.meta_matcher import MetaMatch, PartialDate, parse_partial_date
from oc_coverage.pids import Pid

P = Pid("doi", "10.1/x")


def m(omid, date, item="X"):
    return MetaMatch(item, omid, P, date, "journal article")


@pytest.mark.parametrize("date,rank", [
    (PartialDate(2020, 3), 2), (None, 0), (PartialDate(2020, 3, 14), 3), (PartialDate(2020), 1)])
def test_rank(date, rank):
    assert date_granularity_rank(date) == rank


def test_granularity_wins():
    assert select_canonical_match([m("omid:br/061", "2020"), m("omid:br/062", "2020-03")]).canonical_omid == "omid:br/062"
    assert select_canonical_match([m("omid:br/069", "2020-03-01"), m("omid:br/062", "2020-03")]).canonical_omid == "omid:br/069"


def test_descending_lexicographic_tie_break():
    cm = select_canonical_match([m("omid:br/0610", "2020"), m("omid:br/0609", "2020")])
    assert cm.canonical_omid == "omid:br/0610"
    assert cm.all_omids == {"omid:br/0610", "omid:br/0609"}
    # text order, not numeric: "06" + "9" sorts after "06" + "10..."
    assert select_canonical_match([m("omid:br/069", ""), m("omid:br/0610", "")]).canonical_omid == "omid:br/069"


def test_singleton_and_preconditions():
    cm = select_canonical_match([m("omid:br/061", "2020")])
    assert (cm.canonical_omid, cm.pub_date, cm.all_omids) == ("omid:br/061", "2020", {"omid:br/061"})
    with pytest.raises(ValueError):
        select_canonical_match([])
    with pytest.raises(ValueError):
        select_canonical_match([m("omid:br/1", "", "A"), m("omid:br/2", "", "B")])


def test_duplicate_rows_keep_best_date():
    cm = select_canonical_match([m("omid:br/1", "2020"), m("omid:br/1", "2020-04"), m("omid:br/2", "2020")])
    assert cm.canonical_omid == "omid:br/1" and cm.pub_date == "2020-04"


def test_roundtrip(tmp_path):
    matches = [m("omid:br/1", "2020", "A"), m("omid:br/2", "2020-01", "A"), m("omid:br/3", "", "B")]
    canon = dedup_matches(matches)
    write_canonical_matches(canon, tmp_path / "c.csv")
    assert read_canonical_matches(tmp_path / "c.csv", matches) == canon


match_lists = st.lists(
    st.builds(
        m,
        st.from_regex(r"omid:br/06[0-9]{1,4}", fullmatch=True),
        st.sampled_from(["", "2020", "2020-05", "2020-05-06", "2021", "2020-13", "bad"]),
        st.sampled_from(["A", "B", "C"]),
    ),
    min_size=1,
    max_size=20,
)


@given(match_lists, st.randoms())
def test_order_independent(matches, rnd):
    shuffled = list(matches)
    rnd.shuffle(shuffled)
    assert dedup_matches(shuffled) == dedup_matches(matches)


@given(match_lists)
def test_canonical_properties(matches):
    canon = dedup_matches(matches)
    assert len(canon) == len({x.item_id for x in matches})
    for cm in canon:
        mine = [x for x in matches if x.item_id == cm.item_id]
        assert cm.canonical_omid in cm.all_omids == {x.omid for x in mine}
        best = max(date_granularity_rank(parse_partial_date(x.pub_date)) for x in mine)
        assert date_granularity_rank(parse_partial_date(cm.pub_date)) == best
