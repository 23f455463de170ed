"""Classify cases down a learned hierarchy and turn paths into DDA labels."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ddalearn.cases import Case, Kind
from ddalearn.graphs import graph_to_feature_bag
from ddalearn.learner import (
    ConceptNode,
    ConceptTree,
    LearnerParams,
    NominalStats,
    NumericStats,
    LevelScorer,
    rank_hosts,
    case_node,
    normalized_cu,
    union_score,
)


class EmptyTree(ValueError):
    pass


class LevelsExceedDepth(ValueError):
    pass


@dataclass(frozen=True)
class PruneParams:
    min_cases: float = 5
    prediction_gain_threshold: float = 0.02

    def __post_init__(self):
        if self.min_cases < 0 or self.prediction_gain_threshold < 0:
            raise ValueError("pruning thresholds must be >= 0")


@dataclass(frozen=True)
class DDALabel:
    node_id: int
    path: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        if not self.path or self.path[-1] != self.node_id:
            raise ValueError("label path must end at the labelled node")

    @property
    def depth(self) -> int:
        return len(self.path) - 1

    @property
    def name(self) -> str:
        """Slash-joined path; the string form used in label files."""
        return "/".join(str(i) for i in self.path)

    @classmethod
    def parse(cls, name: str) -> DDALabel:
        path = tuple(int(p) for p in name.split("/"))
        return cls(path[-1], path)


def classify_path(tree: ConceptTree | ConceptNode, case: Case,
                  params: LearnerParams | None = None) -> list[int]:
    """Greedy root-to-leaf descent; the tree is not modified."""
    if isinstance(tree, ConceptTree):
        root, params = tree.root, params or tree.params
    else:
        root, params = tree, params or LearnerParams()
    if root.case_count <= 0:
        raise EmptyTree("cannot classify into an empty tree")
    obs = case_node(case)
    node = root
    path = [node.id]
    while node.children:
        score = union_score((node, obs), params.acuity)
        level = LevelScorer(node.children, node.case_count + obs.case_count, score, params)
        _, best = rank_hosts(level, obs, params)[0]
        node = node.children[best]
        path.append(node.id)
    return path


def prediction_score(node: ConceptNode, case: Case, acuity: float = 0.1) -> float:
    """Expected fraction of the case's observed values that ``node`` predicts.

    Nominal values use P(value | node); numeric values use the unnormalized
    normal density ``exp(-z**2 / 2)`` with the node's acuity-floored spread;
    graph values average P(token | node) over their feature bag.
    """
    if not case.observations:
        return 0.0
    total = 0.0
    for obs in case.observations:
        stats = node.stats.get(obs.attribute)
        if stats is None:
            continue
        if obs.kind is Kind.NOMINAL:
            hit = stats.probability(obs.value)
        elif obs.kind is Kind.NUMERIC and isinstance(stats, NumericStats):
            if stats.n <= 0:
                continue
            z = (float(obs.value) - stats.mean) / max(stats.std, acuity)
            hit = math.exp(-0.5 * z * z)
        elif isinstance(stats, NominalStats):
            bag = graph_to_feature_bag(obs.value)
            size = sum(bag.values())
            hit = sum(m * stats.probability(t) for t, m in bag.items()) / size if size else 0.0
        else:
            continue
        total += obs.confidence * hit
    return total / len(case.observations)


def prune_path(path: list[int], tree: ConceptTree, case: Case,
               params: PruneParams | None = None) -> DDALabel:
    """Truncate a classification path at the first node failing a pruning rule.

    A node survives if (a) it holds at least ``min_cases`` cases, (b) it
    predicts the case no worse than its parent does, and (c) splitting its
    parent into the parent's children gains at least
    ``prediction_gain_threshold`` correctly guessed values per attribute and
    class, i.e. the normalized CU of that partition reaches the threshold.
    The root always survives.
    """
    params = params or PruneParams()
    lp = tree.params
    nodes = _path_nodes(tree.root, path)
    kept = [nodes[0]]
    parent_pred = prediction_score(nodes[0], case, lp.acuity)
    level_cu = [normalized_cu(n, lp) for n in nodes[:-1]]
    for depth in range(1, len(nodes)):
        node = nodes[depth]
        if node.case_count < params.min_cases:
            break
        pred = prediction_score(node, case, lp.acuity)
        if pred < parent_pred:
            break
        if level_cu[depth - 1] < params.prediction_gain_threshold:
            break
        kept.append(node)
        parent_pred = pred
    ids = tuple(n.id for n in kept)
    return DDALabel(ids[-1], ids)


def _path_nodes(root: ConceptNode, path: list[int]) -> list[ConceptNode]:
    if not path or path[0] != root.id:
        raise ValueError("path must start at the root")
    nodes = [root]
    for node_id in path[1:]:
        for child in nodes[-1].children:
            if child.id == node_id:
                nodes.append(child)
                break
        else:
            raise ValueError(f"node {node_id} is not a child of {nodes[-1].id}")
    return nodes


def abstract_label(label: DDALabel, levels: int) -> DDALabel:
    if levels < 0:
        raise ValueError("levels must be >= 0")
    if levels > label.depth:
        raise LevelsExceedDepth(f"cannot go {levels} levels up from depth {label.depth}")
    path = label.path[: len(label.path) - levels]
    return DDALabel(path[-1], path)


def abstract_name(name: str, levels: int) -> str:
    """Abstract a label string, stopping at the root instead of failing."""
    label = DDALabel.parse(name)
    return abstract_label(label, min(levels, label.depth)).name


def label_case(tree: ConceptTree, case: Case, params: PruneParams | None = None) -> DDALabel:
    return prune_path(classify_path(tree, case), tree, case, params)
