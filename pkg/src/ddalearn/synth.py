"""Synthetic appointment-scheduling dialogues with ground truth.

Two partners, ``A`` and ``B``, each own a calendar of hourly slots.  ``A``
opens by demanding a meeting in some week; then the partners alternate
through proposal, evaluation and modification until one of them accepts a
slot that is free for both, or the turn budget runs out and the dialogue
closes without an appointment.

If ``act_transition_matrix`` is given the act sequence is instead drawn
from that Markov chain over :data:`ACTS` (calendars then only matter for
the initial week), which gives a dialogue source with known sequential
statistics.

Every act becomes one segment of annotated tokens.  The ground truth for
each segment (token span, act type, intended feature values) is kept apart
from the tokens, so the learner never sees it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from typing import Sequence

from ddalearn.cases import Case
from ddalearn.pipeline import MODALITIES, Marker, ProsodicEvent, ProsodyKind, Token, Turn
from ddalearn.timeexpr import WEEKDAYS, CalendarInterval, Granularity, interval_relation

ACTS = (
    "DEMAND",
    "SUGGEST_NEW",
    "SUGGEST_ALT",
    "SPECIFY",
    "ACK",
    "REJECT",
    "CONFLICT",
    "LOCATION",
    "CLOSE",
    "NO_CONTRIB",
)
WORK_HOURS = range(8, 18)
WORK_DAYS = 5
FIRST_MONDAY = date(1995, 1, 2)
SPEAKERS = ("A", "B")

Calendar = dict  # slot start (datetime) -> busy (bool)


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    rng_seed: int = 0
    n_dialogues: int = 187
    calendar_density: float = 0.5
    noise: float = 0.0
    act_transition_matrix: tuple[tuple[float, ...], ...] | None = None
    confidence_low: float = 0.6
    confidence_high: float = 1.0
    max_turns: int = 12
    horizon_weeks: int = 4
    location_rate: float = 0.15
    smalltalk_rate: float = 0.2
    day_first_rate: float = 0.4

    def __post_init__(self):
        if self.act_transition_matrix is not None:
            object.__setattr__(self, "act_transition_matrix",
                               tuple(tuple(float(p) for p in row) for row in self.act_transition_matrix))
        self.validate()

    def validate(self) -> None:
        for name in ("calendar_density", "noise", "confidence_low", "confidence_high",
                     "location_rate", "smalltalk_rate", "day_first_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParams(f"{name}={v!r} outside [0, 1]")
        if self.confidence_low > self.confidence_high:
            raise InvalidParams("confidence_low exceeds confidence_high")
        if self.n_dialogues < 0 or self.max_turns < 1 or self.horizon_weeks < 1:
            raise InvalidParams("n_dialogues >= 0, max_turns >= 1 and horizon_weeks >= 1 required")
        m = self.act_transition_matrix
        if m is not None:
            if len(m) != len(ACTS) or any(len(row) != len(ACTS) for row in m):
                raise InvalidParams(f"act_transition_matrix must be {len(ACTS)}x{len(ACTS)}")
            for row in m:
                if any(p < 0 for p in row) or abs(sum(row) - 1.0) > 1e-9:
                    raise InvalidParams("act_transition_matrix rows must be stochastic")

    @classmethod
    def from_dict(cls, d: dict) -> GeneratorParams:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidParams(f"unknown generator parameters: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidParams(str(exc)) from exc


@dataclass(frozen=True)
class SegmentTruth:
    turn_index: int
    start: int
    end: int
    act: str
    features: dict

    def to_dict(self) -> dict:
        return {"turn_index": self.turn_index, "start": self.start, "end": self.end,
                "act": self.act, "features": dict(self.features)}

    @classmethod
    def from_dict(cls, d: dict) -> SegmentTruth:
        return cls(d["turn_index"], d["start"], d["end"], d["act"], dict(d["features"]))


@dataclass
class GeneratedDialogue:
    dialogue_id: str
    turns: list[Turn]
    ground_truth: list[SegmentTruth]
    appointment: datetime | None = None
    calendars: tuple[Calendar, Calendar] | None = field(default=None, repr=False)

    @property
    def acts(self) -> list[str]:
        return [s.act for s in self.ground_truth]


@dataclass
class _Act:
    act: str
    markers: list[tuple[Marker, CalendarInterval | None]]
    modality: str
    features: dict


def random_calendars(rng: random.Random, params: GeneratorParams,
                     first_monday: date = FIRST_MONDAY) -> tuple[Calendar, Calendar]:
    monday = first_monday + timedelta(weeks=rng.randrange(40))
    slots = [
        datetime(d.year, d.month, d.day, h)
        for w in range(params.horizon_weeks)
        for k in range(WORK_DAYS)
        for d in [monday + timedelta(weeks=w, days=k)]
        for h in WORK_HOURS
    ]
    return tuple({s: rng.random() < params.calendar_density for s in slots} for _ in SPEAKERS)


def sample_markov_chain(matrix: Sequence[Sequence[float]], n: int, rng: random.Random,
                        start: int = 0) -> list[int]:
    """``n`` states of a chain started in ``start`` (the start state is included)."""
    states = list(range(len(matrix)))
    out = [start] if n > 0 else []
    while len(out) < n:
        out.append(rng.choices(states, weights=matrix[out[-1]])[0])
    return out


def _week_label(d: date) -> str:
    year, week, _ = d.isocalendar()
    return f"{year}-W{week:02d}"


class _Builder:
    def __init__(self, params: GeneratorParams, calendars: tuple[Calendar, Calendar],
                 rng: random.Random, dialogue_id: str):
        self.params = params
        self.calendars = dict(zip(SPEAKERS, calendars))
        self.rng = rng
        self.dialogue_id = dialogue_id
        self.focus: CalendarInterval | None = None
        self.turns: list[Turn] = []
        self.truth: list[SegmentTruth] = []
        slots = sorted(calendars[0])
        self.weeks = sorted({CalendarInterval.week_of(s.date()).start.date() for s in slots})

    # -- calendar queries -------------------------------------------------

    def free(self, speaker: str, day: date, hour: int) -> bool:
        busy = self.calendars[speaker].get(datetime(day.year, day.month, day.day, hour))
        return busy is False

    def free_hours(self, speaker: str, day: date, exclude=()) -> list[int]:
        return [h for h in WORK_HOURS if self.free(speaker, day, h) and (day, h) not in exclude]

    def week_days(self, monday: date) -> list[date]:
        return [monday + timedelta(days=k) for k in range(WORK_DAYS)]

    # -- act templates ----------------------------------------------------

    def datetime_markers(self, day: date, hour: int | None) -> list[tuple[Marker, CalendarInterval]]:
        """How a speaker refers to ``day`` (and ``hour``) given the current focus."""
        out = []
        focus = self.focus
        target_week = CalendarInterval.week_of(day)
        if focus is None:
            out.append((Marker("datetime", {"form": "date", "value": day.isoformat()}),
                        CalendarInterval.day(day)))
        else:
            focus_week = CalendarInterval.week_of(focus.start.date())
            if focus_week != target_week:
                offset = (target_week.start - focus_week.start).days // 7
                out.append((Marker("datetime", {"form": "week_offset", "value": offset}), target_week))
            out.append((Marker("datetime", {"form": "weekday", "value": WEEKDAYS[day.weekday()]}),
                        CalendarInterval.day(day)))
        if hour is not None:
            out.append((Marker("datetime", {"form": "hour", "value": hour}),
                        CalendarInterval.hour(day, hour)))
        return out

    def track(self, act: _Act) -> _Act:
        """Move the focus through the act's date-times; the first one sets the features."""
        first = True
        for _, interval in act.markers:
            if interval is None:
                continue
            if first:
                relation, specificity = interval_relation(self.focus, interval)
                act.features["date-and-time-interval"] = relation
                if specificity is not None:
                    act.features["date-and-time-specificity"] = specificity
                first = False
            self.focus = interval
        return act

    def demand(self, monday: date) -> _Act:
        week = CalendarInterval.week_of(monday)
        marker = Marker("datetime", {"form": "week", "value": _week_label(monday)})
        return self.track(_Act("DEMAND", [(marker, week)], "ASSERTION", {}))

    def proposal(self, act: str, day: date, hour: int | None) -> _Act:
        return self.track(_Act(act, self.datetime_markers(day, hour), "QUERY", {}))

    def specify(self, day: date, hour: int) -> _Act:
        marker = Marker("datetime", {"form": "hour", "value": hour})
        return self.track(_Act("SPECIFY", [(marker, CalendarInterval.hour(day, hour))], "QUERY", {}))

    def simple(self, act: str) -> _Act:
        rng = self.rng
        if act == "ACK":
            return _Act(act, [(Marker("agree"), None)], "ASSERTION", {"attitude": "POSITIVE"})
        if act == "REJECT":
            return _Act(act, [(Marker("disagree"), None)], "ASSERTION", {"attitude": "NEGATIVE"})
        if act == "CONFLICT":
            if rng.random() < 0.5:
                return _Act(act, [(Marker("conflict"), None)], "ASSERTION", {"conflict": "CONFLICT"})
            return _Act(act, [(Marker("disagree"), None), (Marker("conflict"), None)], "ASSERTION",
                        {"attitude": "NEGATIVE", "conflict": "CONFLICT"})
        if act == "LOCATION":
            where = rng.choice(("LOCAL", "GLOBAL"))
            return _Act(act, [(Marker("place-" + where.lower()), None)], "QUERY", {"location": where})
        if act == "CLOSE":
            return _Act(act, [(Marker("agree"), None), (Marker("commit"), None), (Marker("farewell"), None)],
                        "ASSERTION", {"attitude": "POSITIVE", "assignment": "ASSIGNMENT", "turn": "EXIT"})
        if act == "NO_CONTRIB":
            return _Act(act, [], "ASSERTION", {})
        raise ValueError(act)

    def give_up(self) -> _Act:
        return _Act("REJECT", [(Marker("disagree"), None), (Marker("farewell"), None)], "ASSERTION",
                    {"attitude": "NEGATIVE", "turn": "EXIT"})

    # -- rendering --------------------------------------------------------

    def confidence(self) -> float:
        return self.rng.uniform(self.params.confidence_low, self.params.confidence_high)

    def emit(self, speaker: str, acts: list[_Act]) -> None:
        rng = self.rng
        turn_index = len(self.turns)
        tokens: list[Token] = []
        for k, act in enumerate(acts):
            last = k == len(acts) - 1
            start = len(tokens)
            features = dict(act.features)
            if act.markers and rng.random() < 0.3:
                prosody = (ProsodicEvent(ProsodyKind.PHRASE_BOUNDARY),) if rng.random() < 0.5 else ()
                tokens.append(Token(rng.choice(("well", "so", "uh")), self.confidence(), prosody))
            for marker, _ in act.markers:
                prosody = (ProsodicEvent(ProsodyKind.ACCENT),) if rng.random() < 0.3 else ()
                tokens.append(Token(_surface(marker), self.confidence(), prosody, (marker,)))
            if act.markers and rng.random() < 0.2:
                tokens.append(Token(rng.choice(("then", "perhaps", "maybe")), self.confidence()))
            if last:
                modality, word = act.modality, ("?" if act.modality == "QUERY" else ".")
            else:
                # the connective carries the boundary and closes the first segment
                modality, word = "CONTINUATION", rng.choice(("and", "but", "so"))
            if not act.markers:
                tokens.append(Token(rng.choice(("hello", "hmm", "yes well", "let me see")),
                                    self.confidence()))
            tokens.append(Token(word, self.confidence(), (ProsodicEvent(ProsodyKind.MODALITY, modality),)))
            features["phonMod"] = modality
            features["more-from-same-speaker"] = "NO" if last else "YES"
            self.truth.append(SegmentTruth(turn_index, start, len(tokens), act.act, features))
        self.turns.append(Turn(speaker, tuple(tokens)))


def _surface(marker: Marker) -> str:
    if marker.expr is None:
        return f"<{marker.name}>"
    return f"<{marker.expr['form']}={marker.expr['value']}>"


def _run_task_model(b: _Builder) -> datetime | None:
    p, rng = b.params, b.rng
    if rng.random() < p.smalltalk_rate:
        b.emit("A", [b.simple("NO_CONTRIB")])
        b.emit("B", [b.simple("NO_CONTRIB")])
    week_index = rng.randrange(len(b.weeks))
    b.emit("A", [b.demand(b.weeks[week_index])])

    tried: set[tuple[date, int | None]] = set()
    pending: tuple[date, int | None] | None = None
    speaker = "B"

    def propose(who: str, first: bool) -> list[_Act] | None:
        nonlocal week_index, pending
        previous = pending
        # another hour on the same day first, then other days, then later weeks
        if previous is not None and previous[1] is not None and rng.random() < 0.5:
            hours = b.free_hours(who, previous[0], tried)
            if hours:
                pending = (previous[0], rng.choice(hours))
                tried.add(pending)
                return _with_location([b.proposal("SUGGEST_ALT", previous[0], pending[1])])
        moved = False
        while week_index < len(b.weeks):
            days = [d for d in b.week_days(b.weeks[week_index])
                    if (d, None) not in tried and b.free_hours(who, d, tried)]
            if days:
                day = rng.choice(days)
                hour = None if rng.random() < p.day_first_rate else rng.choice(b.free_hours(who, day, tried))
                pending = (day, hour)
                tried.add(pending)
                act = "SUGGEST_NEW" if first or moved else "SUGGEST_ALT"
                return _with_location([b.proposal(act, day, hour)])
            week_index += 1
            moved = True
        return None

    def _with_location(acts: list[_Act]) -> list[_Act]:
        if rng.random() < p.location_rate:
            acts.append(b.simple("LOCATION"))
        return acts

    def refusal() -> _Act:
        return b.simple(rng.choice(("REJECT", "CONFLICT")))

    first = True
    for _ in range(p.max_turns - 1):
        if pending is None:
            acts = propose(speaker, first)
            first = False
        else:
            day, hour = pending
            if hour is not None:
                if b.free(speaker, day, hour):
                    b.emit(speaker, [b.simple("CLOSE")])
                    return datetime(day.year, day.month, day.day, hour)
                counter = propose(speaker, False)
                acts = None if counter is None else [refusal()] + counter
            else:
                hours = b.free_hours(speaker, day, tried)
                if hours:
                    pending = (day, rng.choice(hours))
                    tried.add(pending)
                    acts = [b.simple("ACK"), b.specify(day, pending[1])]
                else:
                    counter = propose(speaker, False)
                    acts = None if counter is None else [refusal()] + counter
        if acts is None:
            break
        b.emit(speaker, acts)
        speaker = "A" if speaker == "B" else "B"
    b.emit(speaker, [b.give_up()])
    return None


def _run_markov(b: _Builder) -> None:
    p, rng = b.params, b.rng
    week = b.weeks[rng.randrange(len(b.weeks))]
    state = 0
    speaker = "A"
    current: list[_Act] = []
    turns = 0
    while turns < p.max_turns:
        act = ACTS[state]
        rendered = _markov_act(b, act, week)
        if act == "NO_CONTRIB" and current:
            b.emit(speaker, current)
            speaker, current, turns = _other(speaker), [], turns + 1
            if turns >= p.max_turns:
                break
        current.append(rendered)
        if act == "NO_CONTRIB" or len(current) >= 3 or rng.random() < 0.65:
            b.emit(speaker, current)
            speaker, current, turns = _other(speaker), [], turns + 1
        state = rng.choices(range(len(ACTS)), weights=p.act_transition_matrix[state])[0]
    if current:
        b.emit(speaker, current)


def _markov_act(b: _Builder, act: str, week: date) -> _Act:
    rng, focus = b.rng, b.focus
    if act == "DEMAND":
        return b.demand(week)
    if act in ("SUGGEST_NEW", "SUGGEST_ALT", "SPECIFY"):
        if focus is None:
            return b.proposal(act, week + timedelta(days=rng.randrange(WORK_DAYS)), rng.choice(WORK_HOURS))
        focus_day = focus.start.date()
        monday = focus_day - timedelta(days=focus_day.weekday())
        if act == "SUGGEST_NEW":
            day = monday + timedelta(weeks=1, days=rng.randrange(WORK_DAYS))
            return b.proposal(act, day, rng.choice(WORK_HOURS))
        if act == "SUGGEST_ALT":
            days = [monday + timedelta(days=k) for k in range(WORK_DAYS)
                    if monday + timedelta(days=k) != focus_day]
            return b.proposal(act, rng.choice(days), rng.choice(WORK_HOURS))
        if focus.granularity.rank > Granularity.DAY.rank:
            day = monday + timedelta(days=rng.randrange(WORK_DAYS))
            return b.track(_Act("SPECIFY", b.datetime_markers(day, None), "QUERY", {}))
        return b.specify(focus_day, rng.choice(WORK_HOURS))
    return b.simple(act)


def _other(speaker: str) -> str:
    return "A" if speaker == "B" else "B"


def _apply_noise(turns: list[Turn], noise: float, rng: random.Random) -> list[Turn]:
    """Drop or perturb annotations; token count and text stay intact."""
    if noise <= 0:
        return turns
    out = []
    for turn in turns:
        tokens = []
        for tok in turn.tokens:
            markers = tuple(m for m in tok.markers if rng.random() >= noise)
            prosody = []
            for ev in tok.prosody:
                if rng.random() >= noise:
                    prosody.append(ev)
                elif ev.kind is ProsodyKind.MODALITY and rng.random() < 0.5:
                    flipped = rng.choice([m for m in MODALITIES if m != ev.modality])
                    prosody.append(ProsodicEvent(ProsodyKind.MODALITY, flipped))
            if markers and rng.random() < noise / 2:
                prosody.append(ProsodicEvent(ProsodyKind.PHRASE_BOUNDARY))
            conf = tok.confidence * rng.uniform(0.3, 0.7) if rng.random() < noise else tok.confidence
            tokens.append(replace(tok, confidence=conf, prosody=tuple(prosody), markers=markers))
        out.append(Turn(turn.speaker, tuple(tokens)))
    return out


def generate_dialogue(params: GeneratorParams, calendars: tuple[Calendar, Calendar],
                      dialogue_id: str = "d0000", seed=None) -> GeneratedDialogue:
    """One dialogue; deterministic in ``(params, calendars, seed)``.

    ``seed`` defaults to ``params.rng_seed``.
    """
    params.validate()
    if not calendars or len(calendars) != 2 or not calendars[0] or not calendars[1]:
        raise InvalidParams("two nonempty calendars required")
    rng = random.Random(params.rng_seed if seed is None else seed)
    b = _Builder(params, calendars, rng, dialogue_id)
    appointment = None
    if params.act_transition_matrix is None:
        appointment = _run_task_model(b)
    else:
        _run_markov(b)
    turns = _apply_noise(b.turns, params.noise, random.Random(f"{params.rng_seed}/{dialogue_id}/noise"))
    return GeneratedDialogue(dialogue_id, turns, b.truth, appointment, tuple(calendars))


def generate_corpus(params: GeneratorParams) -> list[GeneratedDialogue]:
    params.validate()
    corpus = []
    for i in range(params.n_dialogues):
        dialogue_id = f"d{i:04d}"
        seed = f"{params.rng_seed}/{dialogue_id}"
        calendars = random_calendars(random.Random(seed + "/calendar"), params)
        corpus.append(generate_dialogue(params, calendars, dialogue_id, seed))
    return corpus


def prototype_cases(n_cases: int, n_prototypes: int = 4, n_attributes: int = 6,
                    n_values: int = 4, noise: float = 0.05, seed=0) -> list[Case]:
    """Cases drawn around well-separated nominal prototypes.

    Prototype ``k`` takes value ``v{(k + a) % n_values}`` on attribute
    ``a``, so any two prototypes differ on every attribute.  With
    probability ``noise`` a value is replaced by a uniformly drawn one.
    ``truth_class`` holds the prototype index.
    """
    if n_prototypes > n_values:
        raise InvalidParams("need at least as many values as prototypes")
    if not 0.0 <= noise <= 1.0:
        raise InvalidParams("noise must be in [0, 1]")
    rng = random.Random(seed)
    values = [f"v{i}" for i in range(n_values)]
    cases = []
    for i in range(n_cases):
        k = rng.randrange(n_prototypes)
        obs = {}
        for a in range(n_attributes):
            v = values[(k + a) % n_values]
            if rng.random() < noise:
                v = rng.choice(values)
            obs[f"a{a}"] = v
        cases.append(Case.of(f"p{i}", obs, truth_class=str(k)))
    return cases
