"""Interpolated n-gram model (n <= 3) over dialogue-act label sequences."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

START = "<s>"
WEIGHTS = (0.1, 0.3, 0.6)  # unigram, bigram, trigram


class EmptyTrainingSet(ValueError):
    pass


def interpolation_weights(n: int) -> tuple[float, ...]:
    """The first ``n`` weights, renormalized to sum to 1."""
    w = WEIGHTS[:n]
    total = sum(w)
    return tuple(x / total for x in w)


@dataclass
class NGramModel:
    order: int
    counts: Counter = field(default_factory=Counter)           # k-gram tuple -> count
    context_counts: Counter = field(default_factory=Counter)   # context tuple -> count
    vocabulary: tuple[str, ...] = ()

    @property
    def weights(self) -> tuple[float, ...]:
        return interpolation_weights(self.order)

    def conditional(self, label: str, context: tuple[str, ...]) -> float:
        total = self.context_counts.get(context, 0)
        return self.counts.get(context + (label,), 0) / total if total else 0.0

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "vocabulary": list(self.vocabulary),
            "counts": [[list(k), v] for k, v in sorted(self.counts.items())],
        }

    @classmethod
    def from_dict(cls, d: dict) -> NGramModel:
        model = cls(d["order"], vocabulary=tuple(d["vocabulary"]))
        for k, v in d["counts"]:
            model.counts[tuple(k)] = v
            model.context_counts[tuple(k[:-1])] += v
        return model


def train_ngram(sequences: Sequence[Sequence[str]], n: int = 3) -> NGramModel:
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    if not sequences or not any(sequences):
        raise EmptyTrainingSet("no labels to train on")
    model = NGramModel(n)
    vocab = set()
    for seq in sequences:
        padded = [START] * (n - 1) + list(seq)
        for i in range(n - 1, len(padded)):
            vocab.add(padded[i])
            for k in range(1, n + 1):
                gram = tuple(padded[i - k + 1:i + 1])
                model.counts[gram] += 1
                model.context_counts[gram[:-1]] += 1
    model.vocabulary = tuple(sorted(vocab))
    return model


def predict(model: NGramModel, history: Sequence[str]) -> list[tuple[str, float]]:
    """Labels ranked by interpolated probability; ties go to the smaller label."""
    n = model.order
    padded = [START] * (n - 1) + list(history)
    weights = model.weights
    scores = []
    for label in model.vocabulary:
        s = 0.0
        for k in range(1, n + 1):
            context = tuple(padded[len(padded) - (k - 1):]) if k > 1 else ()
            s += weights[k - 1] * model.conditional(label, context)
        scores.append((label, s))
    total = sum(s for _, s in scores)
    ranked = [(label, s / total) for label, s in scores] if total > 0 else scores
    ranked.sort(key=lambda t: (-round(t[1], 12), t[0]))
    return ranked


def hit_rate(model: NGramModel, test: Sequence[Sequence[str]], k: int = 1,
             label_map: Callable[[str], str] | None = None, skip_initial: bool = False) -> float:
    """Fraction of positions whose true label is among the top ``k`` predictions.

    With ``label_map``, predictions and truth are compared after mapping
    (e.g. to ancestor classes); the top ``k`` are taken before mapping.
    ``skip_initial`` leaves out the first position of every sequence.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = total = 0
    for seq in test:
        for i, truth in enumerate(seq):
            if skip_initial and i == 0:
                continue
            top = [label for label, _ in predict(model, seq[:i])[:k]]
            if label_map is not None:
                top = [label_map(label) for label in top]
                truth = label_map(truth)
            hits += truth in top
            total += 1
    return hits / total if total else 0.0


def majority_baseline(train: Sequence[Sequence[str]], test: Sequence[Sequence[str]]) -> float:
    """Hit rate of always predicting the most frequent training label."""
    freq = Counter(label for seq in train for label in seq)
    if not freq:
        raise EmptyTrainingSet("no labels to train on")
    best = min(freq, key=lambda label: (-freq[label], label))
    labels = [label for seq in test for label in seq]
    return sum(label == best for label in labels) / len(labels) if labels else 0.0
