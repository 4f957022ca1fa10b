"""``defitex`` command line: scan, extract, build, split, evaluate, oracle, stats.

Exit codes: 0 success, 2 fatal I/O error, 3 empty result, 4 schema or
validation error, 5 id mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from . import __version__
from .corpus_ingest import CorpusManifest, SourceDecodeError, scan_corpus
from .dataset_builder import (
    CorrectionError,
    LabeledExample,
    SchemaError,
    SplitSpec,
    apply_corrections,
    build_examples,
    kfold,
    load_corrections,
    reserve_test,
    sort_chronological,
    tokenize_text,
)
from .def_extractor import NoiseFilter
from .diagnostics import Diagnostic, write_diagnostics
from .evaluator import (
    EvaluationError,
    IdMismatchError,
    aggregate_folds,
    evaluate_run,
    oracle_predictions,
    read_predictions,
)
from .pipeline import DefinitionRecord, extract_paper
from .symbols import load_symbol_table

log = logging.getLogger("defitex")

EXIT_OK, EXIT_IO, EXIT_EMPTY, EXIT_SCHEMA, EXIT_IDS = 0, 2, 3, 4, 5

DEFAULTS = {
    "env": [],
    "max_tokens": 500,
    "test_size": 1024,
    "folds": 10,
    "seed": 42,
    "subsample": [1024, 2048, 10240],
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _write_jsonl(path: Path, rows: Iterable[dict]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
            n += 1
    return n


def _read_jsonl(path: Path, parse):
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    out = []
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(parse(json.loads(line)))
            except (json.JSONDecodeError, SchemaError, EvaluationError) as exc:
                raise CliError(EXIT_SCHEMA, "%s:%d: %s" % (path, lineno, exc))
    return out


def _warnings_path(args, default_next_to: Path) -> Path:
    if getattr(args, "warnings", None):
        return Path(args.warnings)
    return default_next_to.with_name(default_next_to.name + ".warnings.jsonl")


def _flush_warnings(args, diags: List[Diagnostic], next_to: Path) -> None:
    path = _warnings_path(args, next_to)
    write_diagnostics(path, diags)
    if diags and not args.quiet:
        print("%d warning(s) written to %s" % (len(diags), path), file=sys.stderr)


# -- subcommands -------------------------------------------------------------


def cmd_scan(args) -> int:
    try:
        manifest = scan_corpus(Path(args.root), Path(args.metadata) if args.metadata else None)
    except (FileNotFoundError, OSError, ValueError) as exc:
        raise CliError(EXIT_IO, str(exc))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(manifest.to_json(), encoding="utf-8", newline="\n")
    _flush_warnings(args, list(manifest.warnings), out)
    log.info("manifest with %d entries written to %s", len(manifest.entries), out)
    return EXIT_OK


def cmd_extract(args) -> int:
    try:
        manifest = CorpusManifest.load(Path(args.manifest))
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_SCHEMA, "bad manifest: %s" % exc)
    symbols = load_symbol_table(Path(args.symbols) if args.symbols else None)
    env_names = ["definition"] + [e for e in args.env if e != "definition"]
    diags: List[Diagnostic] = []
    records: List[DefinitionRecord] = []
    processed = 0
    for entry in manifest.entries:
        try:
            records.extend(extract_paper(entry, env_names, symbols, diags))
            processed += 1
        except (OSError, SourceDecodeError) as exc:
            log.warning("%s: %s", entry.paper_id, exc)
            diags.append(Diagnostic("paper-failed", str(exc), None, entry.paper_id))
    out = Path(args.out)
    _write_jsonl(out, (r.to_dict() for r in records))
    _flush_warnings(args, diags, out)
    log.info("%d definition blocks from %d papers", len(records), processed)
    if processed == 0 or not records:
        print("no definition blocks extracted", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def write_conll(path: Path, examples: Sequence[LabeledExample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, ex in enumerate(examples):
            if k:
                fh.write("\n")
            fh.write("# id = %s\n" % ex.id)
            for tok, tag in zip(ex.tokens, ex.tags):
                fh.write("%s\t%s\n" % (tok.surface, tag.value))


def read_conll(lines: Iterable[str]):
    """Parse CoNLL text back into ``(id, [(surface, tag), ...])`` pairs."""
    blocks = []
    current_id, rows = None, []
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            if current_id is not None or rows:
                blocks.append((current_id, rows))
            current_id, rows = None, []
        elif line.startswith("# id = "):
            current_id = line[len("# id = ") :]
        else:
            surface, tag = line.rsplit("\t", 1)
            rows.append((surface, tag))
    if current_id is not None or rows:
        blocks.append((current_id, rows))
    return blocks


def dataset_stats(records: Sequence[DefinitionRecord], kept: Sequence[LabeledExample], dropped: int, max_tokens: int) -> dict:
    lengths = [len(tokenize_text(r.text)) for r in records]
    kept_terms = [len(ex.terms) for ex in kept]
    return {
        "blocks": len(records),
        "dropped_over_length": dropped,
        "max_tokens": max_tokens,
        "examples": len(kept),
        "examples_with_terms": sum(1 for n in kept_terms if n),
        "terms": sum(kept_terms),
        "mean_tokens": round(statistics.fmean(lengths), 2) if lengths else 0.0,
        "max_tokens_seen": max(lengths) if lengths else 0,
    }


def cmd_build(args) -> int:
    records = _read_jsonl(Path(args.definitions), DefinitionRecord.from_dict)
    if args.filters:
        try:
            noise = NoiseFilter.from_file(Path(args.filters))
        except OSError as exc:
            raise CliError(EXIT_IO, str(exc))
    else:
        noise = NoiseFilter()
    diags: List[Diagnostic] = []
    kept, dropped = build_examples(records, args.max_tokens, args.drop_empty, noise, diags)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out_dir / "dataset.jsonl", (ex.to_dict() for ex in kept))
    write_conll(out_dir / "dataset.conll", kept)
    stats = dataset_stats(records, kept, dropped, args.max_tokens)
    _write_json(out_dir / "stats.json", stats)
    _flush_warnings(args, diags, out_dir / "dataset.jsonl")
    log.info("built %d examples, dropped %d over %d tokens", len(kept), dropped, args.max_tokens)
    return EXIT_OK


def cmd_split(args) -> int:
    examples = _read_jsonl(Path(args.dataset), LabeledExample.from_dict)
    timestamps = None
    if args.manifest:
        timestamps = CorpusManifest.load(Path(args.manifest)).timestamps()
    diags: List[Diagnostic] = []
    ordered = sort_chronological(examples, timestamps, diags)
    pool, remainder = reserve_test(ordered, args.test_size)
    ground_truth = pool
    if args.corrections:
        try:
            with open(args.corrections, encoding="utf-8") as fh:
                corrections = load_corrections(fh)
        except OSError as exc:
            raise CliError(EXIT_IO, str(exc))
        except SchemaError as exc:
            raise CliError(EXIT_SCHEMA, str(exc))
        try:
            ground_truth = apply_corrections(pool, corrections, diags)
        except CorrectionError as exc:
            raise CliError(EXIT_SCHEMA, str(exc))
    remainder_ids = [ex.id for ex in remainder]
    if not remainder_ids:
        log.warning("no examples left after the test reservation; folds are empty")
        folds: List[List[str]] = [[] for _ in range(args.folds)]
    else:
        try:
            folds = kfold(remainder_ids, args.folds, args.seed)
        except ValueError as exc:
            raise CliError(EXIT_SCHEMA, str(exc))
    spec = SplitSpec(
        test_ids=[ex.id for ex in ground_truth],
        folds=folds,
        seed=args.seed,
        subsample_sizes=list(args.subsample),
        test_pool_ids=[ex.id for ex in pool],
    )
    spec.check()
    out = Path(args.out)
    _write_json(out, spec.to_dict())
    gt_path = Path(args.ground_truth) if args.ground_truth else out.with_name("ground_truth.jsonl")
    _write_jsonl(gt_path, (ex.to_dict() for ex in ground_truth))
    _flush_warnings(args, diags, out)
    log.info("test %d (pool %d), %d folds over %d", len(ground_truth), len(pool), len(folds), len(remainder_ids))
    return EXIT_OK


def _score(gold, pred_path: Path, details=None):
    preds = _read_jsonl(pred_path, lambda d: read_predictions([json.dumps(d)])[0])
    try:
        return evaluate_run(gold, preds, details)
    except IdMismatchError as exc:
        raise CliError(EXIT_IDS, "%s: %s" % (pred_path, exc))
    except EvaluationError as exc:
        raise CliError(EXIT_SCHEMA, str(exc))


def cmd_evaluate(args) -> int:
    gold = _read_jsonl(Path(args.ground_truth), LabeledExample.from_dict)
    out = Path(args.out)
    if args.aggregate:
        runs = sorted(Path(args.aggregate).glob("*.jsonl"))
        if not runs:
            raise CliError(EXIT_EMPTY, "no prediction files in %s" % args.aggregate)
        reports = [_score(gold, p) for p in runs]
        agg = aggregate_folds(reports)
        payload = agg.to_dict()
        payload["runs"] = {p.name: r.to_dict() for p, r in zip(runs, reports)}
        _write_json(out, payload)
        print("F1 mean=%.4f std=%.4f over %d runs" % (agg.mean["f1"], agg.std["f1"], agg.n_runs))
        return EXIT_OK
    if not args.predictions:
        raise CliError(EXIT_SCHEMA, "--predictions or --aggregate is required")
    details = [] if args.per_example else None
    report = _score(gold, Path(args.predictions), details)
    _write_json(out, report.to_dict())
    if details is not None:
        _write_jsonl(Path(args.per_example), details)
    print(report.summary())
    return EXIT_OK


def cmd_oracle(args) -> int:
    gold = _read_jsonl(Path(args.ground_truth), LabeledExample.from_dict)
    n = _write_jsonl(Path(args.out), (p.to_dict() for p in oracle_predictions(gold)))
    log.info("%d oracle predictions written", n)
    return EXIT_OK


def cmd_stats(args) -> int:
    examples = _read_jsonl(Path(args.dataset), LabeledExample.from_dict)
    lengths = [len(ex.tokens) for ex in examples]
    tag_counts = {}
    for ex in examples:
        for t in ex.tags:
            tag_counts[t.value] = tag_counts.get(t.value, 0) + 1
    stats = {
        "examples": len(examples),
        "papers": len({ex.paper_id for ex in examples}),
        "terms": sum(len(ex.terms) for ex in examples),
        "mean_tokens": round(statistics.fmean(lengths), 2) if lengths else 0.0,
        "max_tokens": max(lengths) if lengths else 0,
        "tags": dict(sorted(tag_counts.items())),
    }
    print(json.dumps(stats, indent=2, ensure_ascii=False))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defitex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("--config", help="JSON file with option defaults")
    parser.add_argument("-q", "--quiet", action="store_true", help="only report errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="build a corpus manifest")
    p.add_argument("--root", required=True)
    p.add_argument("--metadata", help="TSV of paper_id<TAB>timestamp")
    p.add_argument("--out", default="manifest.json")
    p.add_argument("--warnings")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("extract", help="extract definition blocks and definienda")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default="definitions.jsonl")
    p.add_argument("--env", action="append", help="extra environment name (repeatable)")
    p.add_argument("--symbols", help="JSON symbol-table override")
    p.add_argument("--warnings")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build", help="label examples with IOB2 tags")
    p.add_argument("--definitions", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--drop-empty", action="store_true")
    p.add_argument("--filters", help="noise filter pattern file")
    p.add_argument("--warnings")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("split", help="chronological test reservation and k-fold splits")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", help="take timestamps from this manifest")
    p.add_argument("--corrections")
    p.add_argument("--test-size", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--subsample", type=int, nargs="*")
    p.add_argument("--out", default="splits.json")
    p.add_argument("--ground-truth")
    p.add_argument("--warnings")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--predictions")
    p.add_argument("--aggregate", help="directory of prediction files to score and aggregate")
    p.add_argument("--per-example", help="write per-term match details here")
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="turn ground truth into a perfect prediction file")
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--out", default="oracle.jsonl")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("stats", help="summary statistics of a dataset file")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def _apply_defaults(args, config: dict) -> None:
    """Fill options left unset on the command line: config file, then built-in defaults."""
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        current = getattr(args, key)
        if current is None or (key == "env" and current == []):
            setattr(args, key, config.get(key, value))
    for key, value in config.items():
        if hasattr(args, key) and getattr(args, key) in (None, False) and key not in DEFAULTS:
            setattr(args, key, value)


def _setup_logging(quiet: bool) -> None:
    level = os.environ.get("DEFITEX_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=logging.ERROR if quiet else levels.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.quiet)
    config = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except OSError as exc:
            print("defitex: %s" % exc, file=sys.stderr)
            return EXIT_IO
        except json.JSONDecodeError as exc:
            print("defitex: bad config: %s" % exc, file=sys.stderr)
            return EXIT_SCHEMA
    _apply_defaults(args, config)
    for name, minimum in (("max_tokens", 1), ("folds", 2), ("test_size", 0)):
        if getattr(args, name, None) is not None and getattr(args, name) < minimum:
            print("defitex: --%s must be >= %d" % (name.replace("_", "-"), minimum), file=sys.stderr)
            return EXIT_SCHEMA
    try:
        return args.func(args)
    except CliError as exc:
        print("defitex: %s" % exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
