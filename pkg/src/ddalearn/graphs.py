"""Conceptual graphs used as structured attribute values.

A graph is a bipartite structure of typed concepts and typed, ordered
relations between them.  Two operations are provided: projection (a
label-preserving homomorphism test) and decomposition into a bag of
nominal feature tokens, which is how graphs take part in category utility.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Concept:
    id: str
    type_label: str
    referent: str | None = None


@dataclass(frozen=True)
class Relation:
    type_label: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class ConceptualGraph:
    concepts: tuple[Concept, ...] = ()
    relations: tuple[Relation, ...] = ()
    _by_id: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        concepts = tuple(self.concepts)
        relations = tuple(self.relations)
        object.__setattr__(self, "concepts", concepts)
        object.__setattr__(self, "relations", relations)
        by_id = {}
        for c in concepts:
            if c.id in by_id:
                raise GraphError(f"duplicate concept id {c.id!r}")
            by_id[c.id] = c
        for r in relations:
            for a in r.args:
                if a not in by_id:
                    raise GraphError(f"relation {r.type_label!r} references unknown concept {a!r}")
        object.__setattr__(self, "_by_id", by_id)

    def concept(self, concept_id: str) -> Concept:
        return self._by_id[concept_id]

    @classmethod
    def chain(cls, *items: str) -> ConceptualGraph:
        """Build a linear graph ``[A]-(r1)->[B]-(r2)->[C]`` from alternating labels.

        >>> g = ConceptualGraph.chain("MEET", "TIME", "TUESDAY")
        >>> [c.type_label for c in g.concepts], g.relations[0].type_label
        (['MEET', 'TUESDAY'], 'TIME')
        """
        if len(items) % 2 == 0:
            raise GraphError("chain needs an odd number of labels")
        concepts = [Concept(f"c{i}", label) for i, label in enumerate(items[::2])]
        relations = [
            Relation(label, (concepts[i].id, concepts[i + 1].id))
            for i, label in enumerate(items[1::2])
        ]
        return cls(tuple(concepts), tuple(relations))

    def to_dict(self) -> dict:
        return {
            "concepts": [[c.id, c.type_label, c.referent] for c in self.concepts],
            "relations": [[r.type_label, list(r.args)] for r in self.relations],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ConceptualGraph:
        return cls(
            tuple(Concept(cid, label, ref) for cid, label, ref in d.get("concepts", [])),
            tuple(Relation(label, tuple(args)) for label, args in d.get("relations", [])),
        )


def graph_projection(g: ConceptualGraph, h: ConceptualGraph) -> bool:
    """True iff ``g`` maps homomorphically into ``h``.

    Concepts map to concepts with the same type label; a concept of ``g``
    with a referent only maps to a concept of ``h`` with the same referent.
    Every relation of ``g`` must land on a relation of ``h`` with the same
    type and the same (mapped) argument order.  The mapping need not be
    injective.
    """
    if not g.concepts:
        return True

    h_relations = {(r.type_label, r.args) for r in h.relations}
    candidates: dict[str, list[str]] = {}
    for c in g.concepts:
        options = [
            d.id for d in h.concepts
            if d.type_label == c.type_label and (c.referent is None or c.referent == d.referent)
        ]
        if not options:
            return False
        candidates[c.id] = options

    # most constrained first, ties by degree
    degree = Counter(a for r in g.relations for a in r.args)
    order = sorted(candidates, key=lambda cid: (len(candidates[cid]), -degree[cid]))
    position = {cid: i for i, cid in enumerate(order)}
    # a relation is checked once its last-assigned argument is placed
    checks: dict[str, list[Relation]] = {cid: [] for cid in order}
    for r in g.relations:
        checks[max(r.args, key=position.__getitem__)].append(r)

    mapping: dict[str, str] = {}

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        cid = order[i]
        for target in candidates[cid]:
            mapping[cid] = target
            if all(
                (r.type_label, tuple(mapping[a] for a in r.args)) in h_relations
                for r in checks[cid]
            ) and extend(i + 1):
                return True
        del mapping[cid]
        return False

    return extend(0)


def relation_token(relation: Relation, graph: ConceptualGraph) -> str:
    labels = [relation.type_label] + [graph.concept(a).type_label for a in relation.args]
    return "(" + ",".join(labels) + ")"


def graph_to_feature_bag(g: ConceptualGraph) -> Counter:
    """One token per concept type label plus one per relation triple.

    >>> sorted(graph_to_feature_bag(ConceptualGraph.chain("MEET", "TIME", "TUESDAY")).items())
    [('(TIME,MEET,TUESDAY)', 1), ('MEET', 1), ('TUESDAY', 1)]
    """
    bag = Counter(c.type_label for c in g.concepts)
    bag.update(relation_token(r, g) for r in g.relations)
    return bag

