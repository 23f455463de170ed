"""Line-oriented JSON formats: corpus records, ground truth, tree snapshots, label files.

Corpus files hold one turn per line::

    {"dialogue_id": "d0000", "turn_index": 0, "speaker": "A",
     "tokens": [{"text": "<week=1995-W10>", "confidence": 0.83,
                 "prosody": [{"kind": "ACCENT"}],
                 "domain": [{"marker": "datetime", "expr": {"form": "week", "value": "1995-W10"}}]}]}

Ground truth lives in a separate sidecar (one dialogue per line) so that a
corpus file never carries labels.  Tree snapshots are a single JSON
document; floats are written in shortest round-trip form, so a reloaded
tree continues learning bit for bit like the original.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from itertools import groupby
from pathlib import Path
from typing import IO, Iterable, Iterator

from ddalearn.cases import AttributeSchema, Kind, default_schema
from ddalearn.learner import (
    STATS_BY_KIND,
    ConceptNode,
    ConceptTree,
    LearnerParams,
    NumericStats,
)
from ddalearn.pipeline import Marker, ProsodicEvent, Token, Turn
from ddalearn.synth import GeneratedDialogue, SegmentTruth

SNAPSHOT_FORMAT = "ddalearn-tree"
SNAPSHOT_VERSION = 1


class FormatError(ValueError):
    """Unparseable or inconsistent file content."""


@dataclass(frozen=True)
class CorpusRecord:
    dialogue_id: str
    turn_index: int
    speaker: str
    tokens: tuple[Token, ...]

    @property
    def turn(self) -> Turn:
        return Turn(self.speaker, self.tokens)


def token_to_dict(tok: Token) -> dict:
    d = {"text": tok.text, "confidence": tok.confidence}
    if tok.prosody:
        d["prosody"] = [
            {"kind": e.kind.value} if e.modality is None else {"kind": e.kind.value, "modality": e.modality}
            for e in tok.prosody
        ]
    if tok.markers:
        d["domain"] = [
            {"marker": m.name} if m.expr is None else {"marker": m.name, "expr": m.expr}
            for m in tok.markers
        ]
    return d


def token_from_dict(d: dict) -> Token:
    return Token(
        d["text"],
        float(d.get("confidence", 1.0)),
        tuple(ProsodicEvent(e["kind"], e.get("modality")) for e in d.get("prosody", ())),
        tuple(Marker(m["marker"], m.get("expr")) for m in d.get("domain", ())),
    )


def record_to_json(r: CorpusRecord) -> str:
    return json.dumps({
        "dialogue_id": r.dialogue_id,
        "turn_index": r.turn_index,
        "speaker": r.speaker,
        "tokens": [token_to_dict(t) for t in r.tokens],
    }, ensure_ascii=False)


def record_from_json(line: str) -> CorpusRecord:
    try:
        d = json.loads(line)
        return CorpusRecord(str(d["dialogue_id"]), int(d["turn_index"]), str(d["speaker"]),
                            tuple(token_from_dict(t) for t in d["tokens"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad corpus record: {exc}") from exc


def dialogue_records(dialogue: GeneratedDialogue) -> list[CorpusRecord]:
    return [CorpusRecord(dialogue.dialogue_id, i, t.speaker, t.tokens) for i, t in enumerate(dialogue.turns)]


def write_corpus(dialogues: Iterable[GeneratedDialogue], corpus: IO[str], truth: IO[str] | None = None) -> None:
    for dialogue in dialogues:
        for r in dialogue_records(dialogue):
            corpus.write(record_to_json(r) + "\n")
        if truth is not None:
            truth.write(json.dumps({
                "dialogue_id": dialogue.dialogue_id,
                "appointment": None if dialogue.appointment is None else dialogue.appointment.isoformat(),
                "segments": [s.to_dict() for s in dialogue.ground_truth],
            }) + "\n")


def read_records(lines: Iterable[str]) -> Iterator[CorpusRecord]:
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield record_from_json(line)
        except FormatError as exc:
            raise FormatError(f"line {n}: {exc}") from exc


def read_dialogues(lines: Iterable[str]) -> Iterator[tuple[str, list[Turn]]]:
    """Group records into dialogues; turns must be contiguous and in order."""
    seen = set()
    for dialogue_id, group in groupby(read_records(lines), key=lambda r: r.dialogue_id):
        if dialogue_id in seen:
            raise FormatError(f"dialogue {dialogue_id} is not contiguous")
        seen.add(dialogue_id)
        records = list(group)
        for i, r in enumerate(records):
            if r.turn_index != i:
                raise FormatError(f"dialogue {dialogue_id}: turn {r.turn_index} where {i} expected")
        yield dialogue_id, [r.turn for r in records]


def read_truth(lines: Iterable[str]) -> dict[str, dict]:
    out = {}
    for line in lines:
        if line.strip():
            d = json.loads(line)
            d["segments"] = [SegmentTruth.from_dict(s) for s in d["segments"]]
            if d.get("appointment"):
                d["appointment"] = datetime.fromisoformat(d["appointment"])
            out[d["dialogue_id"]] = d
    return out


# -- tree snapshots ---------------------------------------------------------

def _stats_to_dict(s) -> dict:
    if isinstance(s, NumericStats):
        return {"kind": Kind.NUMERIC.value, "n": s.n, "mean": s.mean, "m2": s.m2}
    return {"kind": s.kind.value, "counts": s.counts}


def _stats_from_dict(d: dict):
    kind = Kind(d["kind"])
    if kind is Kind.NUMERIC:
        return NumericStats(float(d["n"]), float(d["mean"]), float(d["m2"]))
    stats = STATS_BY_KIND[kind]()
    stats.counts = {str(k): float(v) for k, v in d["counts"].items()}
    return stats


def _node_to_dict(node: ConceptNode) -> dict:
    return {
        "id": node.id,
        "case_count": node.case_count,
        "stats": {a: _stats_to_dict(s) for a, s in node.stats.items()},
        "children": [_node_to_dict(c) for c in node.children],
    }


def _node_from_dict(d: dict) -> ConceptNode:
    return ConceptNode(
        int(d["id"]),
        float(d["case_count"]),
        {a: _stats_from_dict(s) for a, s in d["stats"].items()},
        [_node_from_dict(c) for c in d["children"]],
    )


def tree_to_dict(tree: ConceptTree, schema: AttributeSchema | None = None) -> dict:
    p = tree.params
    return {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "params": {"acuity": p.acuity, "cu_tie_epsilon": p.cu_tie_epsilon,
                   "max_children_considered": p.max_children_considered},
        "schema": (schema or default_schema()).to_dict(),
        "next_id": tree.next_id,
        "root": _node_to_dict(tree.root),
    }


def tree_from_dict(d: dict) -> tuple[ConceptTree, AttributeSchema]:
    try:
        if d.get("format") != SNAPSHOT_FORMAT or d.get("version") != SNAPSHOT_VERSION:
            raise FormatError("not a tree snapshot of a supported version")
        tree = ConceptTree(LearnerParams(**d["params"]))
        tree.next_id = int(d["next_id"])
        tree.root = _node_from_dict(d["root"])
        schema = AttributeSchema.from_dict(d["schema"])
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"corrupt tree snapshot: {exc}") from exc
    return tree, schema


def dumps_tree(tree: ConceptTree, schema: AttributeSchema | None = None) -> str:
    return json.dumps(tree_to_dict(tree, schema), ensure_ascii=False, indent=1) + "\n"


def loads_tree(text: str) -> tuple[ConceptTree, AttributeSchema]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt tree snapshot: {exc}") from exc
    if not isinstance(d, dict):
        raise FormatError("corrupt tree snapshot: not an object")
    return tree_from_dict(d)


def save_tree(tree: ConceptTree, path: str | Path, schema: AttributeSchema | None = None) -> None:
    Path(path).write_text(dumps_tree(tree, schema), encoding="utf-8")


def load_tree(path: str | Path) -> tuple[ConceptTree, AttributeSchema]:
    return loads_tree(Path(path).read_text(encoding="utf-8"))


# -- label files --------------------------------------------------------------

def write_labels(sequences: Iterable[tuple[str, list[str]]], out: IO[str]) -> None:
    for dialogue_id, labels in sequences:
        out.write(json.dumps({"dialogue_id": dialogue_id, "labels": labels}) + "\n")


def read_labels(lines: Iterable[str]) -> list[tuple[str, list[str]]]:
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            out.append((str(d["dialogue_id"]), [str(x) for x in d["labels"]]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"label file line {n}: {exc}") from exc
    return out
