"""Independent reference implementations used by the tests.

These work from raw cases by direct enumeration and share no code with
the package's incremental statistics.
"""

from __future__ import annotations

from itertools import combinations

UNKNOWN = "⊥"


def value_masses(cases, attribute):
    """value -> summed probability mass over ``cases`` (nominal only)."""
    mass = {}
    for case in cases:
        for obs in case.observations:
            if obs.attribute != attribute:
                continue
            mass[obs.value] = mass.get(obs.value, 0.0) + obs.confidence
            if obs.confidence < 1.0:
                mass[UNKNOWN] = mass.get(UNKNOWN, 0.0) + (1.0 - obs.confidence)
    return mass


def expected_correct(cases):
    """Σ_A Σ_v P(A=v)², P normalized by the attribute's observed mass."""
    attrs = {o.attribute for c in cases for o in c.observations}
    total = 0.0
    for a in attrs:
        mass = value_masses(cases, a)
        n = sum(mass.values())
        if n > 0:
            total += sum((m / n) ** 2 for m in mass.values())
    return total


def brute_force_cu(partition):
    """Category utility of a partition given as lists of raw cases."""
    everyone = [c for cls in partition for c in cls]
    base = expected_correct(everyone)
    n = len(everyone)
    return sum(len(cls) / n * (expected_correct(cls) - base) for cls in partition) / len(partition)


def set_partitions(items):
    """Every partition of ``items`` into nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def subsets(items, max_size):
    for k in range(1, max_size + 1):
        yield from combinations(items, k)


def boundary_f1(predicted: set, truth: set) -> float:
    if not predicted and not truth:
        return 1.0
    tp = len(predicted & truth)
    if tp == 0:
        return 0.0
    precision, recall = tp / len(predicted), tp / len(truth)
    return 2 * precision * recall / (precision + recall)


def stationary_distribution(matrix):
    import numpy as np

    t = np.asarray(matrix, dtype=float)
    vals, vecs = np.linalg.eig(t.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
    return v / v.sum()


def bayes_hit_rate(matrix):
    import numpy as np

    pi = stationary_distribution(matrix)
    return float(np.sum(pi * np.asarray(matrix).max(axis=1)))
