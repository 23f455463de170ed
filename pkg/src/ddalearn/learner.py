"""Incremental conceptual clustering over mixed-kind, uncertain cases.

The learner grows a concept hierarchy one case at a time.  At each level
it scores four restructuring options with category utility (placing the
case in an existing child, opening a new child, merging the two best
hosts, splitting the best host) and applies the best one.

Nominal and graph attributes keep expected counts per value, numeric
attributes keep a confidence-weighted mean and sum of squared deviations.
An observation with confidence ``p`` contributes mass ``p`` to its value
and ``1 - p`` to :data:`~ddalearn.cases.UNKNOWN`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ddalearn.cases import UNKNOWN, Case, Kind
from ddalearn.graphs import graph_to_feature_bag

# 1 / (2 * sqrt(pi)): the integral of a squared normal density, times sigma
NORMAL_SCORE = 1.0 / (2.0 * math.sqrt(math.pi))
COUNT_TOLERANCE = 1e-9


class EmptyPartition(ValueError):
    pass


class CountMismatch(ValueError):
    pass


@dataclass(frozen=True)
class LearnerParams:
    acuity: float = 0.1
    cu_tie_epsilon: float = 1e-9
    max_children_considered: int | None = None

    def __post_init__(self):
        if not self.acuity > 0:
            raise ValueError("acuity must be > 0")
        if self.cu_tie_epsilon < 0:
            raise ValueError("cu_tie_epsilon must be >= 0")
        if self.max_children_considered is not None and self.max_children_considered < 1:
            raise ValueError("max_children_considered must be >= 1")


class NominalStats:
    """Expected count per value."""

    kind = Kind.NOMINAL
    __slots__ = ("counts",)

    def __init__(self, counts: dict[str, float] | None = None):
        self.counts = dict(counts) if counts else {}

    def add(self, value: str, weight: float) -> None:
        if weight > 0:
            self.counts[value] = self.counts.get(value, 0.0) + weight

    def absorb(self, other: NominalStats) -> None:
        for v, c in other.counts.items():
            self.counts[v] = self.counts.get(v, 0.0) + c

    def copy(self):
        return type(self)(self.counts)

    @property
    def total(self) -> float:
        return sum(self.counts.values())

    def probability(self, value: str) -> float:
        total = self.total
        return self.counts.get(value, 0.0) / total if total > 0 else 0.0

    def score(self, acuity: float) -> float:
        total = self.total
        if total <= 0:
            return 0.0
        return sum(c * c for c in self.counts.values()) / (total * total)

    def same_as(self, other, scale: float) -> bool:
        keys = self.counts.keys() | other.counts.keys()
        tol = COUNT_TOLERANCE * max(1.0, scale)
        return all(abs(self.counts.get(k, 0.0) - scale * other.counts.get(k, 0.0)) <= tol for k in keys)

    def __repr__(self):
        return f"{type(self).__name__}({self.counts!r})"


class GraphStats(NominalStats):
    """Expected count per graph feature token."""

    kind = Kind.GRAPH
    __slots__ = ()


class NumericStats:
    """Weighted count, mean and sum of squared deviations (``m2``)."""

    kind = Kind.NUMERIC
    __slots__ = ("n", "mean", "m2")

    def __init__(self, n: float = 0.0, mean: float = 0.0, m2: float = 0.0):
        self.n, self.mean, self.m2 = n, mean, m2

    def add(self, x: float, weight: float) -> None:
        if weight <= 0:
            return
        n = self.n + weight
        delta = x - self.mean
        self.mean += delta * weight / n
        self.m2 += weight * delta * (x - self.mean)
        self.n = n

    def absorb(self, other: NumericStats) -> None:
        if other.n <= 0:
            return
        if self.n <= 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n

    def copy(self) -> NumericStats:
        return NumericStats(self.n, self.mean, self.m2)

    @property
    def total(self) -> float:
        return self.n

    @property
    def std(self) -> float:
        return math.sqrt(max(self.m2, 0.0) / self.n) if self.n > 0 else 0.0

    def score(self, acuity: float) -> float:
        if self.n <= 0:
            return 0.0
        return NORMAL_SCORE / max(self.std, acuity)

    def same_as(self, other: NumericStats, scale: float) -> bool:
        tol = COUNT_TOLERANCE * max(1.0, scale)
        return (abs(self.n - scale * other.n) <= tol
                and abs(self.mean - other.mean) <= COUNT_TOLERANCE * max(1.0, abs(other.mean))
                and self.m2 <= tol)

    def __repr__(self):
        return f"NumericStats(n={self.n!r}, mean={self.mean!r}, m2={self.m2!r})"


AttributeStats = NominalStats | NumericStats

STATS_BY_KIND = {Kind.NOMINAL: NominalStats, Kind.NUMERIC: NumericStats, Kind.GRAPH: GraphStats}


@dataclass(eq=False)
class ConceptNode:
    id: int
    case_count: float = 0.0
    stats: dict[str, AttributeStats] = field(default_factory=dict)
    children: list[ConceptNode] = field(default_factory=list)
    _score: float | None = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def score(self, acuity: float) -> float:
        """Expected number of attribute values guessed correctly in this node."""
        if self._score is None:
            self._score = sum(s.score(acuity) for s in self.stats.values())
        return self._score

    def absorb(self, other: ConceptNode) -> None:
        self.case_count += other.case_count
        for attr, s in other.stats.items():
            mine = self.stats.get(attr)
            if mine is None:
                self.stats[attr] = s.copy()
            else:
                mine.absorb(s)
        self._score = None

    def clone_stats(self, new_id: int) -> ConceptNode:
        return ConceptNode(new_id, self.case_count, {a: s.copy() for a, s in self.stats.items()})

    def probability(self, attribute: str, value) -> float:
        s = self.stats.get(attribute)
        return s.probability(value) if isinstance(s, NominalStats) else 0.0

    def walk(self, depth: int = 0) -> Iterator[tuple[ConceptNode, int]]:
        yield self, depth
        for child in self.children:
            yield from child.walk(depth + 1)


def case_node(case: Case, node_id: int = -1) -> ConceptNode:
    """Statistics of a single case, as a one-case node."""
    node = ConceptNode(node_id)
    add_case_to_stats(node, case)
    return node


def add_case_to_stats(node: ConceptNode, case: Case) -> ConceptNode:
    node.case_count += 1
    for obs in case.observations:
        p = float(obs.confidence)
        kind = obs.kind
        stats = node.stats.get(obs.attribute)
        if stats is None:
            stats = node.stats[obs.attribute] = STATS_BY_KIND[kind]()
        elif stats.kind is not kind:
            raise TypeError(f"attribute {obs.attribute!r} seen as {stats.kind.value} and {kind.value}")
        if kind is Kind.NOMINAL:
            stats.add(obs.value, p)
            stats.add(UNKNOWN, 1.0 - p)
        elif kind is Kind.NUMERIC:
            stats.add(float(obs.value), p)
        else:
            # each case contributes unit mass, spread over its tokens
            bag = graph_to_feature_bag(obs.value)
            size = sum(bag.values())
            if size:
                for token in sorted(bag):
                    stats.add(token, p * bag[token] / size)
                stats.add(UNKNOWN, 1.0 - p)
    node._score = None
    return node


def union_score(nodes: Iterable[ConceptNode], acuity: float) -> float:
    """Score of the node that would result from pooling ``nodes``."""
    nodes = list(nodes)
    if len(nodes) == 1:
        return nodes[0].score(acuity)
    pooled: dict[str, AttributeStats] = {}
    for node in nodes:
        for attr, s in node.stats.items():
            mine = pooled.get(attr)
            if mine is None:
                pooled[attr] = s.copy()
            else:
                mine.absorb(s)
    return sum(s.score(acuity) for s in pooled.values())


def category_utility(parent: ConceptNode, partition: list[ConceptNode], params: LearnerParams) -> float:
    """Category utility of splitting ``parent`` into ``partition``."""
    if not partition:
        raise EmptyPartition("partition must be nonempty")
    total = sum(c.case_count for c in partition)
    if abs(total - parent.case_count) > COUNT_TOLERANCE * max(1.0, parent.case_count):
        raise CountMismatch(f"partition holds {total} cases, parent {parent.case_count}")
    if parent.case_count <= 0:
        return 0.0
    base = parent.score(params.acuity)
    gain = sum(c.case_count * (c.score(params.acuity) - base) for c in partition)
    return gain / parent.case_count / len(partition)


def normalized_cu(node: ConceptNode, params: LearnerParams) -> float:
    """CU of a node's own child partition, per observed attribute (0 for leaves)."""
    if not node.children:
        return 0.0
    n_attrs = sum(1 for s in node.stats.values() if s.total > 0)
    if n_attrs == 0:
        return 0.0
    return category_utility(node, node.children, params) / n_attrs


class LevelScorer:
    """CU bookkeeping for one node's children with one extra case in play.

    ``count`` and ``score`` describe the parent with the case included.
    Each option is scored by adjusting the sum of per-child terms.
    """

    def __init__(self, children: list[ConceptNode], count: float, score: float, params: LearnerParams):
        self.children = children
        self.count = count
        self.score = score
        self.acuity = params.acuity
        self.terms = [self.term(c.case_count, c.score(self.acuity)) for c in children]
        self.base = sum(self.terms)

    def term(self, case_count: float, score: float) -> float:
        return case_count / self.count * (score - self.score)

    def host(self, i: int, case: ConceptNode) -> float:
        child = self.children[i]
        t = self.term(child.case_count + case.case_count, union_score((child, case), self.acuity))
        return (self.base - self.terms[i] + t) / len(self.children)

    def new(self, case: ConceptNode) -> float:
        t = self.term(case.case_count, case.score(self.acuity))
        return (self.base + t) / (len(self.children) + 1)

    def merge(self, i: int, j: int, case: ConceptNode) -> float:
        a, b = self.children[i], self.children[j]
        t = self.term(a.case_count + b.case_count + case.case_count,
                      union_score((a, b, case), self.acuity))
        return (self.base - self.terms[i] - self.terms[j] + t) / (len(self.children) - 1)

    def split(self, i: int, case: ConceptNode) -> float:
        """Best CU after replacing child ``i`` by its children, case placed in one of them."""
        grandchildren = self.children[i].children
        terms = [self.term(g.case_count, g.score(self.acuity)) for g in grandchildren]
        rest = self.base - self.terms[i] + sum(terms)
        best = max(
            rest - terms[j] + self.term(g.case_count + case.case_count, union_score((g, case), self.acuity))
            for j, g in enumerate(grandchildren)
        )
        return best / (len(self.children) - 1 + len(grandchildren))


def rank_hosts(level: LevelScorer, case: ConceptNode, params: LearnerParams) -> list[tuple[float, int]]:
    """(cu, child index) per candidate host, best first.

    Hosts within ``cu_tie_epsilon`` of the best count as tied and are
    ordered by node id.
    """
    indices = range(len(level.children))
    if params.max_children_considered is not None:
        indices = sorted(indices, key=lambda i: (-level.children[i].case_count, level.children[i].id))
        indices = indices[: params.max_children_considered]
    scored = [(level.host(i, case), i) for i in indices]
    cutoff = max(cu for cu, _ in scored) - params.cu_tie_epsilon
    node_id = lambda t: level.children[t[1]].id  # noqa: E731
    tied = sorted((t for t in scored if t[0] >= cutoff), key=node_id)
    rest = sorted((t for t in scored if t[0] < cutoff), key=lambda t: (-t[0], node_id(t)))
    return tied + rest


class ConceptTree:
    """A concept hierarchy plus the id counter and parameters that grew it."""

    def __init__(self, params: LearnerParams | None = None):
        self.params = params or LearnerParams()
        self.next_id = 1
        self.root = ConceptNode(0)

    def _new_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def __len__(self) -> int:
        return sum(1 for _ in self.root.walk())

    def nodes(self) -> Iterator[tuple[ConceptNode, int]]:
        return self.root.walk()

    def find(self, node_id: int) -> ConceptNode:
        for node, _ in self.root.walk():
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def leaves(self) -> list[ConceptNode]:
        return [n for n, _ in self.root.walk() if n.is_leaf]

    def incorporate(self, case: Case) -> list[int]:
        """Add one case; return the ids of the nodes it descended through."""
        obs = case_node(case)
        node = self.root
        path = [node.id]
        if node.is_leaf:
            return self._settle_leaf(node, obs, path)
        node.absorb(obs)
        params = self.params
        while True:
            level = LevelScorer(node.children, node.case_count, node.score(params.acuity), params)
            ranked = rank_hosts(level, obs, params)
            best_cu, best = ranked[0]
            options = [(best_cu, "host"), (level.new(obs), "new")]
            if len(ranked) > 1 and len(node.children) > 2:
                second = ranked[1][1]
                options.append((level.merge(best, second, obs), "merge"))
            if node.children[best].children:
                options.append((level.split(best, obs), "split"))
            top = max(cu for cu, _ in options)
            action = next(a for cu, a in options if cu >= top - params.cu_tie_epsilon)

            if action == "host":
                child = node.children[best]
                path.append(child.id)
                if child.is_leaf:
                    return self._settle_leaf(child, obs, path)
                child.absorb(obs)
                node = child
            elif action == "new":
                leaf = obs.clone_stats(self._new_id())
                node.children.append(leaf)
                path.append(leaf.id)
                return path
            elif action == "merge":
                a, b = node.children[best], node.children[second]
                merged = a.clone_stats(self._new_id())
                merged.absorb(b)
                first, last = sorted((best, second))
                merged.children = [node.children[first], node.children[last]]
                node.children[first] = merged
                del node.children[last]
                merged.absorb(obs)
                path.append(merged.id)
                node = merged
            else:
                host = node.children[best]
                node.children[best:best + 1] = host.children

    def _settle_leaf(self, leaf: ConceptNode, obs: ConceptNode, path: list[int]) -> list[int]:
        if leaf.case_count == 0 or _exact_match(leaf, obs):
            leaf.absorb(obs)
            return path
        old = leaf.clone_stats(self._new_id())
        new = obs.clone_stats(self._new_id())
        leaf.children = [old, new]
        leaf.absorb(obs)
        path.append(new.id)
        return path


def _exact_match(leaf: ConceptNode, obs: ConceptNode) -> bool:
    """True iff every case in ``leaf`` looks exactly like the one-case node ``obs``."""
    if leaf.stats.keys() != obs.stats.keys():
        return False
    for attr, s in leaf.stats.items():
        o = obs.stats[attr]
        if s.kind is not o.kind or not s.same_as(o, leaf.case_count):
            return False
    return True


def learn_corpus(cases: Iterable[Case], params: LearnerParams | None = None,
                 tree: ConceptTree | None = None) -> ConceptTree:
    """Fold :meth:`ConceptTree.incorporate` over ``cases`` in order.

    Passing an existing ``tree`` continues learning from it.
    """
    tree = tree if tree is not None else ConceptTree(params)
    for case in cases:
        tree.incorporate(case.for_learner())
    return tree
