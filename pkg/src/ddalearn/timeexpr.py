"""Calendar intervals and context-dependent resolution of date-time expressions.

Expressions come in six closed forms, each a small dict::

    {"form": "date", "value": "1995-03-07"}
    {"form": "week", "value": "1995-W10"}
    {"form": "weekday", "value": "TUESDAY"}
    {"form": "part_of_day", "value": "AFTERNOON"}
    {"form": "week_offset", "value": 1}
    {"form": "hour", "value": 14}

The last four are underspecified and are resolved against the interval
currently under discussion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum


class Granularity(str, Enum):
    YEAR = "YEAR"
    MONTH = "MONTH"
    WEEK = "WEEK"
    DAY = "DAY"
    PART_OF_DAY = "PART_OF_DAY"
    HOUR = "HOUR"
    MINUTE = "MINUTE"

    @property
    def rank(self) -> int:
        """Larger is coarser."""
        return _RANK[self]


_RANK = {g: i for i, g in enumerate(reversed(list(Granularity)))}

WEEKDAYS = ("MONDAY", "TUESDAY", "WEDNESDAY", "THURSDAY", "FRIDAY", "SATURDAY", "SUNDAY")
PARTS_OF_DAY = {"MORNING": (8, 12), "AFTERNOON": (12, 18), "EVENING": (18, 22)}
RESOLVED_CONFIDENCE = 0.95  # expressions that needed the context


class UnresolvableWithoutContext(ValueError):
    pass


class BadExpression(ValueError):
    pass


@dataclass(frozen=True)
class CalendarInterval:
    """Half-open interval ``[start, end)`` at a named granularity."""

    start: datetime
    end: datetime
    granularity: Granularity

    def __post_init__(self):
        object.__setattr__(self, "granularity", Granularity(self.granularity))
        if self.start > self.end:
            raise ValueError("interval start after end")

    def contains(self, other: CalendarInterval) -> bool:
        return self.start <= other.start and other.end <= self.end

    def disjoint(self, other: CalendarInterval) -> bool:
        return self.end <= other.start or other.end <= self.start

    @classmethod
    def day(cls, d: date) -> CalendarInterval:
        start = datetime(d.year, d.month, d.day)
        return cls(start, start + timedelta(days=1), Granularity.DAY)

    @classmethod
    def week_of(cls, d: date) -> CalendarInterval:
        monday = datetime(d.year, d.month, d.day) - timedelta(days=d.weekday())
        return cls(monday, monday + timedelta(days=7), Granularity.WEEK)

    @classmethod
    def hour(cls, d: date, h: int) -> CalendarInterval:
        start = datetime(d.year, d.month, d.day, h)
        return cls(start, start + timedelta(hours=1), Granularity.HOUR)

    def to_dict(self) -> dict:
        return {"start": self.start.isoformat(), "end": self.end.isoformat(),
                "granularity": self.granularity.value}

    @classmethod
    def from_dict(cls, d: dict) -> CalendarInterval:
        return cls(datetime.fromisoformat(d["start"]), datetime.fromisoformat(d["end"]),
                   Granularity(d["granularity"]))


@dataclass
class DialogueContext:
    """Per-dialogue discourse state for date-time interpretation."""

    current_interval: CalendarInterval | None = None
    last_proposal_by_speaker: dict[str, CalendarInterval] = field(default_factory=dict)
    history: list[CalendarInterval] = field(default_factory=list)

    def accept(self, interval: CalendarInterval, speaker: str | None = None) -> None:
        self.current_interval = interval
        if speaker is not None:
            self.last_proposal_by_speaker[speaker] = interval
        self.history.append(interval)


@dataclass(frozen=True)
class Resolution:
    interval: CalendarInterval
    relation: str             # SAME | NEW | ALTERNATIVE
    specificity: str | None   # SPECIFY | GENERALIZE | SAME, None unless nested
    confidence: float


def interval_relation(previous: CalendarInterval | None,
                      new: CalendarInterval) -> tuple[str, str | None]:
    """(interval relation, specificity) of ``new`` against ``previous``.

    Nested intervals continue the same topic (SAME) and carry a
    specificity; disjoint intervals of equal granularity are alternatives;
    everything else is NEW with no specificity.
    """
    if previous is None:
        return "NEW", None
    if new == previous:
        return "SAME", "SAME"
    if previous.contains(new):
        return "SAME", "SPECIFY"
    if new.contains(previous):
        return "SAME", "GENERALIZE"
    if new.disjoint(previous) and new.granularity is previous.granularity:
        return "ALTERNATIVE", None
    return "NEW", None


def _parse_week(value: str) -> CalendarInterval:
    try:
        year, week = value.split("-W")
        monday = date.fromisocalendar(int(year), int(week), 1)
    except ValueError as exc:
        raise BadExpression(f"bad ISO week {value!r}") from exc
    return CalendarInterval.week_of(monday)


def _day_of(ctx: CalendarInterval | None, form: str) -> date:
    if ctx is None or ctx.granularity.rank > Granularity.DAY.rank:
        raise UnresolvableWithoutContext(f"{form} needs a day in context")
    return ctx.start.date()


def _week_of(ctx: CalendarInterval | None, form: str) -> CalendarInterval:
    if ctx is None or ctx.granularity.rank > Granularity.WEEK.rank:
        raise UnresolvableWithoutContext(f"{form} needs a week in context")
    return CalendarInterval.week_of(ctx.start.date())


def resolve_interval(expr: dict, current: CalendarInterval | None) -> tuple[CalendarInterval, bool]:
    """Absolute interval for ``expr``; the flag tells whether context was used."""
    form, value = expr.get("form"), expr.get("value")
    if form == "date":
        try:
            return CalendarInterval.day(date.fromisoformat(value)), False
        except (TypeError, ValueError) as exc:
            raise BadExpression(f"bad date {value!r}") from exc
    if form == "week":
        return _parse_week(value), False
    if form == "weekday":
        if value not in WEEKDAYS:
            raise BadExpression(f"bad weekday {value!r}")
        week = _week_of(current, form)
        return CalendarInterval.day(week.start.date() + timedelta(days=WEEKDAYS.index(value))), True
    if form == "week_offset":
        week = _week_of(current, form)
        return CalendarInterval.week_of(week.start.date() + timedelta(weeks=int(value))), True
    if form == "part_of_day":
        if value not in PARTS_OF_DAY:
            raise BadExpression(f"bad part of day {value!r}")
        d = _day_of(current, form)
        lo, hi = PARTS_OF_DAY[value]
        start = datetime(d.year, d.month, d.day)
        return CalendarInterval(start + timedelta(hours=lo), start + timedelta(hours=hi),
                                Granularity.PART_OF_DAY), True
    if form == "hour":
        h = int(value)
        if not 0 <= h < 24:
            raise BadExpression(f"bad hour {value!r}")
        return CalendarInterval.hour(_day_of(current, form), h), True
    raise BadExpression(f"unknown expression form {form!r}")


def resolve_datetime(expr: dict, context: DialogueContext) -> Resolution:
    interval, used_context = resolve_interval(expr, context.current_interval)
    relation, specificity = interval_relation(context.current_interval, interval)
    return Resolution(interval, relation, specificity, RESOLVED_CONFIDENCE if used_context else 1.0)
