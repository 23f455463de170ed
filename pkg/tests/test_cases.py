from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddalearn.cases import (
    UNKNOWN,
    AttributeSchema,
    AttributeSpec,
    Case,
    ConfidenceOutOfRange,
    DuplicateAttribute,
    Kind,
    KindMismatch,
    Observation,
    UnknownAttribute,
    UnknownValue,
    default_schema,
    validate_case,
)
from ddalearn.graphs import ConceptualGraph

SCHEMA = default_schema()


def test_valid_case_returned_unchanged():
    case = Case.of("c", {"attitude": ("POSITIVE", 0.9)})
    assert validate_case(case, SCHEMA) is case


def test_unknown_value():
    with pytest.raises(UnknownAttribute):
        validate_case(Case.of("c", {"attitude": "MAYBE"}), SCHEMA)
    with pytest.raises(UnknownValue):
        validate_case(Case.of("c", {"attitude": "MAYBE"}), SCHEMA)


def test_unknown_attribute():
    with pytest.raises(UnknownAttribute):
        validate_case(Case.of("c", {"mood": "POSITIVE"}), SCHEMA)


def test_confidence_out_of_range():
    with pytest.raises(ConfidenceOutOfRange):
        validate_case(Case.of("c", {"attitude": ("POSITIVE", 1.3)}), SCHEMA)
    with pytest.raises(ConfidenceOutOfRange):
        validate_case(Case.of("c", {"attitude": ("POSITIVE", float("nan"))}), SCHEMA)


def test_duplicate_attribute():
    case = Case("c", (Observation("turn", "EXIT"), Observation("turn", "EXIT", 0.5)))
    with pytest.raises(DuplicateAttribute):
        validate_case(case, SCHEMA)


def test_kind_mismatch():
    with pytest.raises(KindMismatch):
        validate_case(Case.of("c", {"attitude": 3.0}), SCHEMA)
    schema = AttributeSchema((AttributeSpec("g", Kind.GRAPH), AttributeSpec("x", Kind.NUMERIC)))
    validate_case(Case.of("c", {"g": ConceptualGraph.chain("MEET"), "x": 2.5}), schema)
    with pytest.raises(KindMismatch):
        validate_case(Case.of("c", {"x": float("inf")}), schema)


def test_unknown_token_allowed():
    validate_case(Case.of("c", {"attitude": UNKNOWN}), SCHEMA)


def test_default_schema_matches_feature_list():
    assert SCHEMA.names == [
        "attitude", "location", "conflict", "date-and-time-interval", "date-and-time-specificity",
        "assignment", "phonMod", "turn", "more-from-same-speaker",
    ]
    assert SCHEMA.get("date-and-time-interval").allowed_values == {"SAME", "NEW", "ALTERNATIVE"}


def test_schema_round_trip():
    assert AttributeSchema.from_dict(SCHEMA.to_dict()) == SCHEMA


def test_truth_class_stripped_for_learner():
    case = Case.of("c", {"turn": "EXIT"}, truth_class="k")
    assert case.for_learner().truth_class is None
    assert case.for_learner().observations == case.observations


@st.composite
def valid_cases(draw):
    obs = []
    for spec in SCHEMA.attributes:
        if draw(st.booleans()):
            value = draw(st.sampled_from(sorted(spec.allowed_values)))
            obs.append(Observation(spec.name, value, draw(st.floats(0, 1))))
    return Case("c", tuple(obs))


@given(valid_cases())
def test_validate_idempotent(case):
    once = validate_case(case, SCHEMA)
    assert validate_case(once, SCHEMA) == once == case
