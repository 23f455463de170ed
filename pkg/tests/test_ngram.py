from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddalearn.ngram import (
    START,
    EmptyTrainingSet,
    NGramModel,
    hit_rate,
    interpolation_weights,
    majority_baseline,
    predict,
    train_ngram,
)


def test_bigram_counts():
    model = train_ngram([["a", "b", "a", "b"]], n=2)
    bigrams = {k: v for k, v in model.counts.items() if len(k) == 2 and START not in k}
    assert bigrams == {("a", "b"): 2, ("b", "a"): 1}
    assert model.counts[("a",)] == 2 and model.counts[("b",)] == 2
    assert model.counts[(START, "a")] == 1


def test_single_label_trigram():
    model = train_ngram([["a"]], n=3)
    assert dict(model.counts) == {("a",): 1, (START, "a"): 1, (START, START, "a"): 1}


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        train_ngram([])
    with pytest.raises(EmptyTrainingSet):
        train_ngram([[], []])
    with pytest.raises(ValueError):
        train_ngram([["a"]], n=4)


def test_weights():
    assert interpolation_weights(3) == pytest.approx((0.1, 0.3, 0.6))
    assert interpolation_weights(2) == pytest.approx((0.25, 0.75))
    assert interpolation_weights(1) == (1.0,)


def test_predict_examples():
    assert predict(train_ngram([["a", "b", "a", "b"]], 2), ["a"])[0][0] == "b"
    ranked = predict(train_ngram([["a", "b", "a", "c", "a", "b"]], 2), ["a"])
    assert [label for label, _ in ranked[:2]] == ["b", "c"]


def test_predict_interpolation_by_hand():
    model = train_ngram([["a", "b", "a", "c", "a", "b"]], 2)
    scores = dict(predict(model, ["a"]))
    # unigram a 3/6 b 2/6 c 1/6; bigram after a: b 2/3, c 1/3
    raw = {"a": 0.25 * 3 / 6, "b": 0.25 * 2 / 6 + 0.75 * 2 / 3, "c": 0.25 * 1 / 6 + 0.75 * 1 / 3}
    assert scores == pytest.approx({k: v / sum(raw.values()) for k, v in raw.items()})


def test_long_history_truncated():
    model = train_ngram([["a", "b", "c", "a", "c", "b"]], 3)
    assert predict(model, ["c", "b", "a", "c"]) == predict(model, ["a", "c"])


def test_hit_rate_examples():
    seq = [["a", "b", "a", "b"]]
    # the start sentinel makes the first position predictable for n >= 2
    assert hit_rate(train_ngram(seq, 3), seq, 1) == 1.0
    assert hit_rate(train_ngram(seq, 2), seq, 1) == 1.0
    # unigram only: tie a/b goes to a, right on positions 0 and 2
    assert hit_rate(train_ngram(seq, 1), seq, 1) == 0.5
    model = train_ngram([["a", "b", "c", "b", "a"]], 3)
    assert hit_rate(model, [["c", "a", "a", "b"]], k=len(model.vocabulary)) == 1.0


def test_cycle_after_first_position():
    cycle = [["x", "y", "z"] * 5]
    model = train_ngram(cycle, 2)
    assert hit_rate(model, cycle, 1, skip_initial=True) == 1.0


def test_label_map_applied_to_both_sides():
    model = train_ngram([["0/1/3", "0/2/5", "0/1/4"]], 2)
    parent = lambda name: name.rsplit("/", 1)[0]  # noqa: E731
    test = [["0/1/4", "0/2/6"]]
    assert hit_rate(model, test, 1, parent) >= hit_rate(model, test, 1)


def test_majority_baseline():
    assert majority_baseline([["a", "b", "b"]], [["b", "a", "b", "b"]]) == 0.75
    with pytest.raises(EmptyTrainingSet):
        majority_baseline([], [["a"]])


def test_model_round_trip():
    model = train_ngram([["a", "b"], ["b", "b", "a"]], 3)
    back = NGramModel.from_dict(model.to_dict())
    assert back.counts == model.counts and back.context_counts == model.context_counts
    assert predict(back, ["b"]) == predict(model, ["b"])


labels = st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8), min_size=1, max_size=5)


@given(labels, st.integers(1, 3), st.lists(st.sampled_from("abcd"), max_size=4))
def test_predict_is_distribution(train, n, history):
    model = train_ngram(train, n)
    ranked = predict(model, history)
    assert sum(p for _, p in ranked) == pytest.approx(1.0, abs=1e-9)
    probs = [round(p, 12) for _, p in ranked]
    assert probs == sorted(probs, reverse=True)


@given(labels, labels, st.integers(1, 3))
def test_hit_rate_monotone_in_k(train, test, n):
    model = train_ngram(train, n)
    rates = [hit_rate(model, test, k) for k in (1, 2, 3, 4)]
    assert rates == sorted(rates)


@given(labels, st.integers(1, 3))
def test_counts_are_consistent_marginals(train, n):
    model = train_ngram(train, n)
    for gram, count in model.counts.items():
        if len(gram) < n:
            extensions = sum(c for g, c in model.counts.items() if len(g) == len(gram) + 1 and g[1:] == gram)
            assert extensions == count
