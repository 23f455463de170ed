from __future__ import annotations

import random
from collections import Counter

import pytest

from ddalearn.pipeline import process_dialogue
from ddalearn.synth import (
    ACTS,
    GeneratorParams,
    InvalidParams,
    generate_corpus,
    generate_dialogue,
    prototype_cases,
    random_calendars,
)

QUIET = dict(smalltalk_rate=0.0, location_rate=0.0, day_first_rate=0.0)


def markov_matrix(seed=0, sharp=3.0):
    rng = random.Random(seed)
    rows = []
    for _ in ACTS:
        w = [rng.random() ** sharp for _ in ACTS]
        rows.append(tuple(x / sum(w) for x in w))
    return tuple(rows)


def test_all_free_gives_three_acts():
    params = GeneratorParams(calendar_density=0.0, **QUIET)
    d = generate_dialogue(params, random_calendars(random.Random(1), params))
    assert d.acts == ["DEMAND", "SUGGEST_NEW", "CLOSE"]
    assert d.appointment is not None
    close = process_dialogue(d.dialogue_id, d.turns).cases[-1]
    assert close.get("assignment").value == "ASSIGNMENT"


def test_no_common_slot_ends_in_exit():
    params = GeneratorParams(calendar_density=0.0, max_turns=4, **QUIET)
    a, b = random_calendars(random.Random(2), params)
    slots = sorted(a)
    a = {s: i % 2 == 0 for i, s in enumerate(slots)}
    b = {s: i % 2 == 1 for i, s in enumerate(slots)}
    d = generate_dialogue(params, (a, b))
    assert d.appointment is None
    cases = process_dialogue(d.dialogue_id, d.turns).cases
    assert cases[-1].get("turn").value == "EXIT"
    assert all(c.get("assignment") is None for c in cases)


def test_deterministic():
    params = GeneratorParams(rng_seed=4, n_dialogues=5, noise=0.2)
    assert generate_corpus(params) == generate_corpus(params)


def test_corpus_sizes_and_seeds():
    assert generate_corpus(GeneratorParams(n_dialogues=0)) == []
    assert len(generate_corpus(GeneratorParams(n_dialogues=187))) == 187
    a = generate_corpus(GeneratorParams(rng_seed=1, n_dialogues=3))
    b = generate_corpus(GeneratorParams(rng_seed=2, n_dialogues=3))
    assert a != b


def test_invalid_params():
    with pytest.raises(InvalidParams):
        GeneratorParams(noise=1.5)
    with pytest.raises(InvalidParams):
        GeneratorParams(confidence_low=0.9, confidence_high=0.5)
    with pytest.raises(InvalidParams):
        GeneratorParams(act_transition_matrix=[[1.0]])
    bad = [list(r) for r in markov_matrix()]
    bad[0][0] += 0.1
    with pytest.raises(InvalidParams):
        GeneratorParams(act_transition_matrix=bad)
    with pytest.raises(InvalidParams):
        GeneratorParams.from_dict({"colour": "red"})


def test_accepted_appointments_free_for_both():
    for d in generate_corpus(GeneratorParams(rng_seed=9, n_dialogues=100)):
        if d.appointment is not None:
            a, b = d.calendars
            assert not a[d.appointment] and not b[d.appointment]


def test_confidences_within_bounds():
    params = GeneratorParams(n_dialogues=20, confidence_low=0.7, confidence_high=0.8)
    for d in generate_corpus(params):
        for turn in d.turns:
            assert all(0.7 <= t.confidence <= 0.8 for t in turn.tokens)


def test_ground_truth_on_token_indices():
    for d in generate_corpus(GeneratorParams(rng_seed=3, n_dialogues=30)):
        for s in d.ground_truth:
            assert 0 <= s.start < s.end <= len(d.turns[s.turn_index].tokens)
            assert s.act in ACTS


@pytest.mark.parametrize("seed", [0, 5])
def test_noise_free_pipeline_recovers_truth(seed):
    for d in generate_corpus(GeneratorParams(rng_seed=seed, n_dialogues=60)):
        out = process_dialogue(d.dialogue_id, d.turns)
        assert out.spans == [(s.turn_index, s.start, s.end) for s in d.ground_truth]
        assert [c.values() for c in out.cases] == [s.features for s in d.ground_truth]


def test_markov_bigrams_match_matrix():
    # At 10k acts a row holds ~1k transitions, so one cell's sampling error is
    # ~0.015 and a fixed 0.03 band over 100 cells is missed about half the
    # time; 40k acts make a miss a >5 sigma event.
    matrix = markov_matrix(seed=11, sharp=1.0)
    params = GeneratorParams(rng_seed=2, n_dialogues=4000, max_turns=10, act_transition_matrix=matrix)
    pairs = Counter()
    n_acts = 0
    for d in generate_corpus(params):
        acts = [ACTS.index(a) for a in d.acts]
        n_acts += len(acts)
        pairs.update(zip(acts, acts[1:]))
    assert n_acts >= 40_000
    for s in range(len(ACTS)):
        row_total = sum(pairs[s, t] for t in range(len(ACTS)))
        for t in range(len(ACTS)):
            assert pairs[s, t] / row_total == pytest.approx(matrix[s][t], abs=0.03)


def test_prototype_cases():
    cases = prototype_cases(50, noise=0.0, seed=1)
    by_class = {}
    for c in cases:
        by_class.setdefault(c.truth_class, set()).add(tuple(sorted(c.values().items())))
    assert all(len(v) == 1 for v in by_class.values())
    assert prototype_cases(10, seed=3) == prototype_cases(10, seed=3)
