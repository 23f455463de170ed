"""From annotated token streams to labelled segment cases.

Tokens arrive pre-annotated: a recognition confidence, prosodic events and
domain markers.  A dialogue is processed turn by turn:

1. domain markers become domain events (date-times are resolved against
   the dialogue context, which is updated as proposals come in);
2. the turn is cut into segments by the prosody-after-domain-event rule;
3. each segment becomes one :class:`~ddalearn.cases.Case` over the
   segment feature schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ddalearn.cases import Case, Observation
from ddalearn.timeexpr import (
    BadExpression,
    CalendarInterval,
    DialogueContext,
    UnresolvableWithoutContext,
    resolve_datetime,
)


class ProsodyKind(str, Enum):
    ACCENT = "ACCENT"
    PHRASE_BOUNDARY = "PHRASE_BOUNDARY"
    FOCUS = "FOCUS"
    MODALITY = "MODALITY"


MODALITIES = ("QUERY", "ASSERTION", "CONTINUATION")
BOUNDARY_KINDS = frozenset({ProsodyKind.PHRASE_BOUNDARY, ProsodyKind.MODALITY})


class EventKind(str, Enum):
    DATETIME = "DATETIME"
    CONFLICT = "CONFLICT"
    ATTITUDE = "ATTITUDE"
    LOCATION = "LOCATION"
    ASSIGNMENT = "ASSIGNMENT"
    EXIT = "EXIT"


# domain-specialist rule table: marker -> (event kind, value)
MARKER_RULES: dict[str, tuple[EventKind, str]] = {
    "agree": (EventKind.ATTITUDE, "POSITIVE"),
    "disagree": (EventKind.ATTITUDE, "NEGATIVE"),
    "conflict": (EventKind.CONFLICT, "CONFLICT"),
    "place-local": (EventKind.LOCATION, "LOCAL"),
    "place-global": (EventKind.LOCATION, "GLOBAL"),
    "commit": (EventKind.ASSIGNMENT, "ASSIGNMENT"),
    "farewell": (EventKind.EXIT, "EXIT"),
}
DATETIME_MARKER = "datetime"

EVENT_ATTRIBUTE = {
    EventKind.ATTITUDE: "attitude",
    EventKind.LOCATION: "location",
    EventKind.CONFLICT: "conflict",
    EventKind.ASSIGNMENT: "assignment",
    EventKind.EXIT: "turn",
}


@dataclass(frozen=True)
class ProsodicEvent:
    kind: ProsodyKind
    modality: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ProsodyKind(self.kind))
        if (self.kind is ProsodyKind.MODALITY) != (self.modality is not None):
            raise ValueError("modality is set exactly for MODALITY events")
        if self.modality is not None and self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")


@dataclass(frozen=True)
class Marker:
    """A domain annotation on a token; ``expr`` only for date-time markers."""

    name: str
    expr: dict | None = None

    @property
    def is_domain(self) -> bool:
        return self.name in MARKER_RULES or self.name == DATETIME_MARKER


@dataclass(frozen=True)
class Token:
    text: str
    confidence: float = 1.0
    prosody: tuple[ProsodicEvent, ...] = ()
    markers: tuple[Marker, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prosody", tuple(self.prosody))
        object.__setattr__(self, "markers", tuple(self.markers))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"token confidence {self.confidence!r} outside [0, 1]")

    @property
    def has_domain_marker(self) -> bool:
        return any(m.is_domain for m in self.markers)

    @property
    def ends_phrase(self) -> bool:
        return any(e.kind in BOUNDARY_KINDS for e in self.prosody)

    @property
    def modality(self) -> str | None:
        found = [e.modality for e in self.prosody if e.kind is ProsodyKind.MODALITY]
        return found[-1] if found else None


@dataclass(frozen=True)
class DomainEvent:
    kind: EventKind
    value: str
    confidence: float
    token_index: int
    specificity: str | None = None
    interval: CalendarInterval | None = None


@dataclass(frozen=True)
class Turn:
    speaker: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Segment:
    """Token slice ``[start, end)`` of one turn."""

    start: int
    end: int
    tokens: tuple[Token, ...]


def extract_domain_events(turn: Iterable[Token], context: DialogueContext,
                          speaker: str | None = None) -> tuple[list[DomainEvent], DialogueContext]:
    """Apply the marker rule table; date-time markers update ``context`` in place.

    Markers that cannot be resolved (no usable context, malformed
    expression) or are unknown produce no event.
    """
    events = []
    for i, token in enumerate(turn):
        for marker in token.markers:
            if marker.name == DATETIME_MARKER:
                try:
                    res = resolve_datetime(marker.expr or {}, context)
                except (UnresolvableWithoutContext, BadExpression):
                    continue
                events.append(DomainEvent(EventKind.DATETIME, res.relation,
                                          token.confidence * res.confidence, i,
                                          res.specificity, res.interval))
                context.accept(res.interval, speaker)
            elif marker.name in MARKER_RULES:
                kind, value = MARKER_RULES[marker.name]
                events.append(DomainEvent(kind, value, token.confidence, i))
    return events, context


def segment_turn(turn: Iterable[Token]) -> list[Segment]:
    """Cut after a phrase-level prosodic event that follows a domain marker."""
    tokens = tuple(turn)
    segments = []
    start = 0
    seen_domain = False
    for i, token in enumerate(tokens):
        seen_domain = seen_domain or token.has_domain_marker
        if seen_domain and token.ends_phrase:
            segments.append(Segment(start, i + 1, tokens[start:i + 1]))
            start = i + 1
            seen_domain = False
    if start < len(tokens) or not segments:
        segments.append(Segment(start, len(tokens), tokens[start:]))
    return segments


def label_segment(segment: Segment, events: Iterable[DomainEvent], next_segment_same_speaker: bool,
                  case_id: str = "", **case_fields) -> Case:
    """Feature vector of one segment.

    Per attribute the value comes from the first event in the segment;
    its confidence is the highest among events agreeing on that value.
    """
    chosen: dict[str, list] = {}

    def put(attr: str, value: str, conf: float) -> None:
        if attr not in chosen:
            chosen[attr] = [value, conf]
        elif chosen[attr][0] == value:
            chosen[attr][1] = max(chosen[attr][1], conf)

    first_datetime = None
    for ev in sorted(events, key=lambda e: e.token_index):
        if ev.kind is EventKind.DATETIME:
            # the first date-time relates the segment to the prior focus; later
            # ones only add support when they agree with it
            if first_datetime is None:
                first_datetime = ev
            elif (ev.value, ev.specificity) != (first_datetime.value, first_datetime.specificity):
                continue
            put("date-and-time-interval", ev.value, ev.confidence)
            if ev.specificity is not None:
                put("date-and-time-specificity", ev.specificity, ev.confidence)
        else:
            put(EVENT_ATTRIBUTE[ev.kind], ev.value, ev.confidence)
    modalities = [t.modality for t in segment.tokens if t.modality is not None]
    if modalities:
        chosen["phonMod"] = [modalities[-1], 1.0]
    chosen["more-from-same-speaker"] = ["YES" if next_segment_same_speaker else "NO", 1.0]
    observations = tuple(Observation(a, v, c) for a, (v, c) in chosen.items())
    return Case(case_id, observations, **case_fields)


@dataclass
class SegmentedDialogue:
    dialogue_id: str
    cases: list[Case] = field(default_factory=list)
    # (turn index, start, end) per case
    spans: list[tuple[int, int, int]] = field(default_factory=list)


def process_dialogue(dialogue_id: str, turns: Iterable[Turn]) -> SegmentedDialogue:
    """Run event extraction, segmentation and labelling over one dialogue."""
    context = DialogueContext()
    pending = []  # (turn index, speaker, segment, events)
    for t, turn in enumerate(turns):
        events, context = extract_domain_events(turn.tokens, context, turn.speaker)
        for seg in segment_turn(turn.tokens):
            inside = [e for e in events if seg.start <= e.token_index < seg.end]
            pending.append((t, turn.speaker, seg, inside))

    out = SegmentedDialogue(dialogue_id)
    for k, (t, speaker, seg, events) in enumerate(pending):
        same = k + 1 < len(pending) and pending[k + 1][1] == speaker
        case = label_segment(seg, events, same, f"{dialogue_id}:{k}",
                             speaker=speaker, dialogue_id=dialogue_id, position=k)
        out.cases.append(case)
        out.spans.append((t, seg.start, seg.end))
    return out
