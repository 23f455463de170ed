"""Attribute schema, observations and cases: the learner's input vocabulary."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from numbers import Real

from ddalearn.graphs import ConceptualGraph

# Receives the residual (1 - confidence) mass of an uncertain observation.
UNKNOWN = "⊥"


class Kind(str, Enum):
    NOMINAL = "NOMINAL"
    NUMERIC = "NUMERIC"
    GRAPH = "GRAPH"


class ValidationError(ValueError):
    pass


class UnknownAttribute(ValidationError):
    pass


class UnknownValue(UnknownAttribute):
    """A nominal value outside the attribute's allowed set."""


class KindMismatch(ValidationError):
    pass


class ConfidenceOutOfRange(ValidationError):
    pass


class DuplicateAttribute(ValidationError):
    pass


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: Kind
    allowed_values: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.allowed_values is not None:
            if self.kind is not Kind.NOMINAL:
                raise ValueError(f"{self.name}: allowed_values only apply to NOMINAL attributes")
            object.__setattr__(self, "allowed_values", frozenset(self.allowed_values))


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[AttributeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")

    def __contains__(self, name: str) -> bool:
        return any(a.name == name for a in self.attributes)

    def get(self, name: str) -> AttributeSpec:
        for a in self.attributes:
            if a.name == name:
                return a
        raise UnknownAttribute(f"unknown attribute {name!r}")

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def to_dict(self) -> dict:
        return {
            "attributes": [
                {
                    "name": a.name,
                    "kind": a.kind.value,
                    "allowed_values": None if a.allowed_values is None else sorted(a.allowed_values),
                }
                for a in self.attributes
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> AttributeSchema:
        return cls(tuple(
            AttributeSpec(a["name"], Kind(a["kind"]),
                          None if a.get("allowed_values") is None else frozenset(a["allowed_values"]))
            for a in d["attributes"]
        ))


def _nominal(name: str, *values: str) -> AttributeSpec:
    return AttributeSpec(name, Kind.NOMINAL, frozenset(values))


SEGMENT_FEATURES = AttributeSchema((
    _nominal("attitude", "POSITIVE", "NEGATIVE"),
    _nominal("location", "LOCAL", "GLOBAL"),
    _nominal("conflict", "CONFLICT"),
    _nominal("date-and-time-interval", "SAME", "NEW", "ALTERNATIVE"),
    _nominal("date-and-time-specificity", "SPECIFY", "GENERALIZE", "SAME"),
    _nominal("assignment", "ASSIGNMENT"),
    _nominal("phonMod", "QUERY", "ASSERTION", "CONTINUATION"),
    _nominal("turn", "EXIT"),
    _nominal("more-from-same-speaker", "YES", "NO"),
))


def default_schema() -> AttributeSchema:
    """The segment feature schema produced by the dialogue pipeline."""
    return SEGMENT_FEATURES


@dataclass(frozen=True)
class Observation:
    attribute: str
    value: str | float | ConceptualGraph
    confidence: float = 1.0

    @property
    def kind(self) -> Kind:
        return value_kind(self.value)


def value_kind(value) -> Kind:
    if isinstance(value, ConceptualGraph):
        return Kind.GRAPH
    if isinstance(value, str):
        return Kind.NOMINAL
    if isinstance(value, Real) and not isinstance(value, bool):
        return Kind.NUMERIC
    raise KindMismatch(f"unsupported value type {type(value).__name__}")


@dataclass(frozen=True)
class Case:
    """One dialogue segment as a bag of attribute observations.

    Attributes without an observation are missing, which is different from
    an observation whose value is :data:`UNKNOWN`.  ``truth_class`` is
    carried for scoring only and is removed by :meth:`for_learner`.
    """

    id: str
    observations: tuple[Observation, ...] = ()
    speaker: str = ""
    dialogue_id: str = ""
    position: int = 0
    truth_class: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))

    @classmethod
    def of(cls, case_id: str, values: dict, **kwargs) -> Case:
        """Shorthand: ``{"A": "x", "B": ("y", 0.6)}`` → observations."""
        obs = []
        for attr, v in values.items():
            if isinstance(v, tuple):
                obs.append(Observation(attr, v[0], v[1]))
            else:
                obs.append(Observation(attr, v))
        return cls(case_id, tuple(obs), **kwargs)

    def get(self, attribute: str) -> Observation | None:
        for o in self.observations:
            if o.attribute == attribute:
                return o
        return None

    def values(self) -> dict:
        return {o.attribute: o.value for o in self.observations}

    def for_learner(self) -> Case:
        return replace(self, truth_class=None) if self.truth_class is not None else self


def validate_case(case: Case, schema: AttributeSchema) -> Case:
    """Return ``case`` unchanged if it conforms to ``schema``, else raise."""
    seen = set()
    for obs in case.observations:
        if obs.attribute in seen:
            raise DuplicateAttribute(f"{case.id}: attribute {obs.attribute!r} observed twice")
        seen.add(obs.attribute)
        spec = schema.get(obs.attribute)
        conf = obs.confidence
        if not isinstance(conf, Real) or math.isnan(conf) or not 0.0 <= conf <= 1.0:
            raise ConfidenceOutOfRange(f"{case.id}: confidence {conf!r} for {obs.attribute!r}")
        kind = value_kind(obs.value)
        if kind is not spec.kind:
            raise KindMismatch(f"{case.id}: {obs.attribute!r} expects {spec.kind.value}, got {kind.value}")
        if kind is Kind.NUMERIC and not math.isfinite(obs.value):
            raise KindMismatch(f"{case.id}: non-finite value for {obs.attribute!r}")
        if (kind is Kind.NOMINAL and spec.allowed_values is not None
                and obs.value != UNKNOWN and obs.value not in spec.allowed_values):
            raise UnknownValue(f"{case.id}: {obs.value!r} is not a value of {obs.attribute!r}")
    return case

