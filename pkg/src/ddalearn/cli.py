"""Command-line entry points.

    ddalearn generate --out corpus.jsonl [--params gen.json] [--seed N] [--n-dialogues N] [--noise P]
    ddalearn learn    --corpus corpus.jsonl --out tree.json [--resume tree.json]
    ddalearn label    --corpus corpus.jsonl --tree tree.json --out labels.jsonl [--abstract L]
    ddalearn evaluate --train train.jsonl --test test.jsonl [-n 3] [--abstract L]
    ddalearn segment  --corpus corpus.jsonl

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Iterable

from ddalearn.cases import AttributeSchema, ValidationError, default_schema, validate_case
from ddalearn.classify import PruneParams, abstract_name, label_case
from ddalearn.corpus import FormatError, load_tree, read_dialogues, read_labels, save_tree, write_corpus, write_labels
from ddalearn.learner import ConceptTree, LearnerParams
from ddalearn.ngram import EmptyTrainingSet, hit_rate, majority_baseline, train_ngram
from ddalearn.pipeline import process_dialogue, segment_turn
from ddalearn.synth import GeneratorParams, InvalidParams, generate_corpus

EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def corpus_cases(lines: Iterable[str], schema: AttributeSchema):
    """Yield (dialogue id, validated learner cases) per dialogue."""
    for dialogue_id, turns in read_dialogues(lines):
        segmented = process_dialogue(dialogue_id, turns)
        yield dialogue_id, [validate_case(c, schema) for c in segmented.cases]


def learn_corpus_file(corpus: Path, tree: ConceptTree | None = None,
                      params: LearnerParams | None = None,
                      schema: AttributeSchema | None = None) -> ConceptTree:
    schema = schema or default_schema()
    tree = tree if tree is not None else ConceptTree(params)
    with open(corpus, encoding="utf-8") as f:
        for _, cases in corpus_cases(f, schema):
            for case in cases:
                tree.incorporate(case.for_learner())
    return tree


def label_corpus_file(corpus: Path, tree: ConceptTree, schema: AttributeSchema,
                      prune: PruneParams, abstract: int = 0) -> list[tuple[str, list[str]]]:
    out = []
    with open(corpus, encoding="utf-8") as f:
        for dialogue_id, cases in corpus_cases(f, schema):
            if tree.root.case_count > 0:
                names = [abstract_name(label_case(tree, c, prune).name, abstract) for c in cases]
            else:
                names = [str(tree.root.id)] * len(cases)
            out.append((dialogue_id, names))
    return out


def evaluate_labels(train: list[list[str]], test: list[list[str]], n: int = 3,
                    abstract: int = 0) -> dict:
    model = train_ngram(train, n)
    label_map = (lambda name: abstract_name(name, abstract)) if abstract else None
    mapped = {label_map(x) if label_map else x for seq in train + test for x in seq}
    baseline_train = [[label_map(x) for x in s] for s in train] if label_map else train
    baseline_test = [[label_map(x) for x in s] for s in test] if label_map else test
    return {
        "n": n,
        "abstract": abstract,
        "classes": len(mapped),
        "positions": sum(len(s) for s in test),
        "hit_rate_1st": hit_rate(model, test, 1, label_map),
        "hit_rate_1st_2nd": hit_rate(model, test, 2, label_map),
        "majority_baseline": majority_baseline(baseline_train, baseline_test),
    }


def _tree_summary(tree: ConceptTree) -> str:
    nodes = list(tree.nodes())
    leaves = sum(1 for n, _ in nodes if n.is_leaf)
    depth = max(d for _, d in nodes)
    return (f"cases={tree.root.case_count:g} nodes={len(nodes)} leaves={leaves} "
            f"depth={depth} top-level classes={len(tree.root.children)}")


def cmd_generate(args) -> int:
    overrides = {}
    if args.params:
        try:
            overrides = json.loads(Path(args.params).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read params file: {exc}") from exc
        if not isinstance(overrides, dict):
            raise DataError("params file must hold a JSON object")
    for flag, key in (("seed", "rng_seed"), ("n_dialogues", "n_dialogues"), ("noise", "noise")):
        if getattr(args, flag) is not None:
            overrides[key] = getattr(args, flag)
    try:
        params = GeneratorParams.from_dict(overrides)
    except InvalidParams as exc:
        raise DataError(str(exc)) from exc
    out = Path(args.out)
    truth = Path(args.truth) if args.truth else out.with_name(out.name + ".truth")
    corpus = generate_corpus(params)
    with open(out, "w", encoding="utf-8") as c, open(truth, "w", encoding="utf-8") as t:
        write_corpus(corpus, c, t)
    print(f"wrote {len(corpus)} dialogues to {out} (ground truth: {truth})")
    return 0


def cmd_learn(args) -> int:
    if args.resume:
        tree, schema = load_tree(args.resume)
    else:
        tree = ConceptTree(LearnerParams(acuity=args.acuity))
        schema = default_schema()
    tree = learn_corpus_file(Path(args.corpus), tree, schema=schema)
    save_tree(tree, args.out, schema)
    print(_tree_summary(tree))
    return 0


def cmd_label(args) -> int:
    tree, schema = load_tree(args.tree)
    prune = PruneParams(args.min_cases, args.theta)
    labelled = label_corpus_file(Path(args.corpus), tree, schema, prune, args.abstract)
    with open(args.out, "w", encoding="utf-8") as f:
        write_labels(labelled, f)
    classes = {x for _, seq in labelled for x in seq}
    print(f"labelled {sum(len(s) for _, s in labelled)} segments in {len(labelled)} dialogues "
          f"with {len(classes)} classes")
    return 0


def cmd_evaluate(args) -> int:
    with open(args.train, encoding="utf-8") as f:
        train = [seq for _, seq in read_labels(f)]
    with open(args.test, encoding="utf-8") as f:
        test = [seq for _, seq in read_labels(f)]
    report = evaluate_labels(train, test, args.n, args.abstract)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    print(f"{report['classes']} classes (abstraction {report['abstract']}), n={report['n']}, "
          f"{report['positions']} test positions")
    print(f"  1st prediction:      {report['hit_rate_1st']:.2%}")
    print(f"  1st+2nd prediction:  {report['hit_rate_1st_2nd']:.2%}")
    print(f"  majority baseline:   {report['majority_baseline']:.2%}")
    return 0


def cmd_segment(args) -> int:
    with open(args.corpus, encoding="utf-8") as f:
        for dialogue_id, turns in read_dialogues(f):
            for i, turn in enumerate(turns):
                spans = " ".join(f"[{s.start},{s.end})" for s in segment_turn(turn.tokens))
                print(f"{dialogue_id} {i} {turn.speaker} {spans}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ddalearn", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic corpus and its ground-truth sidecar")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="ground-truth path (default: OUT.truth)")
    p.add_argument("--params", help="JSON file of generator parameters")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-dialogues", type=int)
    p.add_argument("--noise", type=float)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn (or keep learning) a concept tree from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", help="snapshot to continue from")
    p.add_argument("--acuity", type=float, default=LearnerParams.acuity)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("label", help="label every segment with its pruned class")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-cases", type=float, default=PruneParams.min_cases)
    p.add_argument("--theta", type=float, default=PruneParams.prediction_gain_threshold)
    p.add_argument("--abstract", type=int, default=0)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("evaluate", help="train an n-gram predictor and report hit rates")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("-n", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--abstract", type=int, default=0)
    p.add_argument("--out", help="also write the report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("segment", help="print segment boundaries per turn")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_segment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "abstract", 0) < 0:
        build_parser().error("--abstract must be >= 0")
    try:
        return args.func(args)
    except (DataError, FormatError, ValidationError, EmptyTrainingSet, OSError, ValueError) as exc:
        print(f"ddalearn {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
