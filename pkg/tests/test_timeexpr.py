from __future__ import annotations

from datetime import date, datetime

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddalearn.timeexpr import (
    BadExpression,
    CalendarInterval,
    DialogueContext,
    Granularity,
    UnresolvableWithoutContext,
    interval_relation,
    resolve_datetime,
)

W10 = CalendarInterval.week_of(date(1995, 3, 6))


def ctx(interval=None) -> DialogueContext:
    c = DialogueContext()
    if interval is not None:
        c.accept(interval, "A")
    return c


def test_weekday_inside_week():
    res = resolve_datetime({"form": "weekday", "value": "TUESDAY"}, ctx(W10))
    assert res.interval == CalendarInterval.day(date(1995, 3, 7))
    assert (res.relation, res.specificity) == ("SAME", "SPECIFY")
    assert res.confidence == pytest.approx(0.95)


def test_equal_interval_is_same():
    res = resolve_datetime({"form": "week", "value": "1995-W10"}, ctx(W10))
    assert res.interval == W10
    assert (res.relation, res.specificity, res.confidence) == ("SAME", "SAME", 1.0)


def test_weekday_without_context():
    with pytest.raises(UnresolvableWithoutContext):
        resolve_datetime({"form": "weekday", "value": "TUESDAY"}, ctx())
    with pytest.raises(UnresolvableWithoutContext):
        resolve_datetime({"form": "hour", "value": 9}, ctx(W10))


def test_generalize_alternative_new():
    tuesday = CalendarInterval.day(date(1995, 3, 7))
    assert resolve_datetime({"form": "week", "value": "1995-W10"}, ctx(tuesday)).specificity == "GENERALIZE"
    alt = resolve_datetime({"form": "weekday", "value": "THURSDAY"}, ctx(tuesday))
    assert (alt.relation, alt.specificity) == ("ALTERNATIVE", None)
    new = resolve_datetime({"form": "week", "value": "1995-W12"}, ctx(tuesday))
    assert (new.relation, new.specificity) == ("NEW", None)
    first = resolve_datetime({"form": "date", "value": "1995-03-07"}, ctx())
    assert (first.relation, first.specificity) == ("NEW", None)


def test_other_forms():
    tuesday = CalendarInterval.day(date(1995, 3, 7))
    after = resolve_datetime({"form": "part_of_day", "value": "AFTERNOON"}, ctx(tuesday)).interval
    assert (after.start, after.end) == (datetime(1995, 3, 7, 12), datetime(1995, 3, 7, 18))
    assert after.granularity is Granularity.PART_OF_DAY
    hour = resolve_datetime({"form": "hour", "value": 14}, ctx(after)).interval
    assert hour == CalendarInterval.hour(date(1995, 3, 7), 14)
    nxt = resolve_datetime({"form": "week_offset", "value": 1}, ctx(tuesday))
    assert nxt.interval == CalendarInterval.week_of(date(1995, 3, 13))
    assert nxt.relation == "NEW"


def test_bad_expressions():
    for expr in ({"form": "date", "value": "1995-13-01"}, {"form": "weekday", "value": "FUNDAY"},
                 {"form": "hour", "value": 25}, {"form": "fortnight"}, {"form": "week", "value": "W10"}):
        with pytest.raises(BadExpression):
            resolve_datetime(expr, ctx(CalendarInterval.day(date(1995, 3, 7))))


def test_resolution_does_not_touch_context():
    c = ctx(W10)
    resolve_datetime({"form": "weekday", "value": "MONDAY"}, c)
    assert c.current_interval == W10 and len(c.history) == 1


def test_interval_round_trip():
    assert CalendarInterval.from_dict(W10.to_dict()) == W10


days = st.dates(date(1995, 1, 2), date(1995, 12, 31))


@st.composite
def intervals(draw):
    d = draw(days)
    kind = draw(st.sampled_from(["week", "day", "hour"]))
    if kind == "week":
        return CalendarInterval.week_of(d)
    if kind == "day":
        return CalendarInterval.day(d)
    return CalendarInterval.hour(d, draw(st.integers(8, 17)))


@given(intervals(), intervals())
def test_relation_invariants(prev, new):
    relation, specificity = interval_relation(prev, new)
    if specificity == "SPECIFY":
        assert prev.contains(new) and prev != new
    if specificity == "SAME":
        assert prev == new
    if specificity == "GENERALIZE":
        assert new.contains(prev) and prev != new
    if relation == "ALTERNATIVE":
        assert new.disjoint(prev) and new.granularity is prev.granularity
    assert (specificity is None) == (relation != "SAME")
