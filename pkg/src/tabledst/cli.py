"""Command-line entry point.

Option values resolve as: command-line flag, then ``TABLEDST_<OPTION>``
from the environment (e.g. ``TABLEDST_SEED=7``), then the built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from typing import Any, Sequence

from tabledst import __version__
from tabledst.bench import REPRESENTATIONS, engine_throughput, itc_check, profile_corpus
from tabledst.dataset import (
    VERSIONS,
    DatasetError,
    compare_statistics,
    compute_statistics,
    emit_training_targets,
    load_corpus,
    normalize_labels,
    read_corpus,
    replay_failures,
    separator_violations,
    write_corpus,
)
from tabledst.dataset.normalize import normalize_state
from tabledst.evaluation import evaluate_run
from tabledst.io import make_meta, read_jsonl, write_jsonl, write_tsv
from tabledst.state import DialogueState
from tabledst.templating import ContextConfig
from tabledst.tracker import StateSource, TrackingOptions, default_workers, make_generator, track_corpus

ENV_PREFIX = "TABLEDST_"
CONTEXTS = ("prev-state", "last4+prev-state", "full-history", "full-history+prev-state")

log = logging.getLogger("tabledst")


class UsageError(ValueError):
    """A flag combination or input file that violates a command contract."""


class ValidationFailed(Exception):
    def __init__(self, result: dict) -> None:
        super().__init__("corpus validation failed")
        self.result = result


def _env(name: str, default: Any = None, cast=str) -> Any:
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _add_context(p: argparse.ArgumentParser) -> None:
    p.add_argument("--context", choices=CONTEXTS, default=_env("context", "prev-state"))


def _add_workers(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=_env("workers", None, int), help="default: available CPUs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabledst", description="Dialogue state tracking as table operations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", default=_env("verbose", False, bool))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="load a MultiWoz release into the internal corpus format")
    p.add_argument("--version", dest="mwz_version", choices=VERSIONS, default=_env("version", None), required=_env("version") is None)
    p.add_argument("--in", dest="input", default=_env("in"), required=_env("in") is None)
    p.add_argument("--out", default=_env("out"), required=_env("out") is None)
    p.add_argument("--no-label-fix", action="store_true", default=_env("no_label_fix", False, bool))

    p = sub.add_parser("extract-ops", help="emit (input, target) training pairs")
    p.add_argument("--corpus", default=_env("corpus"), required=_env("corpus") is None)
    p.add_argument("--out", default=_env("out"), required=_env("out") is None)
    p.add_argument("--seed", type=int, default=_env("seed", None, int), help="shuffle target fragments per turn")
    p.add_argument("--shuffle-rows", type=int, default=_env("shuffle_rows", None, int), help="shuffle previous-state rows per turn")
    p.add_argument("--escape", action="store_true", default=_env("escape", False, bool), help="escape ';' inside values")
    p.add_argument("--split", default=_env("split", None))
    _add_context(p)

    p = sub.add_parser("track", help="run a generator over a corpus")
    p.add_argument("--corpus", default=_env("corpus"), required=_env("corpus") is None)
    p.add_argument("--generator", default=_env("generator", "oracle"), help="oracle | noisy:SPEC | exec:CMD | http:URL")
    p.add_argument("--state-source", choices=("predicted", "gold"), default=_env("state_source", "predicted"))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--out", default=_env("out"), required=_env("out") is None)
    p.add_argument("--timeout", type=float, default=_env("timeout", 30.0, float))
    p.add_argument("--retries", type=int, default=_env("retries", 2, int))
    p.add_argument("--schema-filter", action="store_true", default=_env("schema_filter", False, bool))
    p.add_argument("--none-deletes", action="store_true", default=_env("none_deletes", False, bool), help="treat 'INSERT slot = none' as DELETE")
    p.add_argument("--split", default=_env("split", None))
    _add_context(p)
    _add_workers(p)

    p = sub.add_parser("eval", help="score a tracking run against the corpus")
    p.add_argument("--run", default=_env("run"), required=_env("run") is None)
    p.add_argument("--corpus", default=_env("corpus"), required=_env("corpus") is None)
    p.add_argument("--schema-filter", action="store_true", default=_env("schema_filter", False, bool))
    p.add_argument("--report", default=_env("report"), required=_env("report") is None)
    _add_workers(p)

    p = sub.add_parser("bench", help="per-turn length accounting and engine throughput")
    p.add_argument("--corpus", default=_env("corpus"), required=_env("corpus") is None)
    p.add_argument("--repr", dest="representation", choices=REPRESENTATIONS, default=_env("repr", "ops"))
    p.add_argument("--out", default=_env("out"), help="summary TSV")
    p.add_argument("--dump", default=_env("dump"), help="per-turn length distribution (JSON lines)")
    p.add_argument("--throughput", action="store_true", help="also time the parse/apply/diff engine")
    _add_context(p)
    _add_workers(p)

    p = sub.add_parser("validate", help="replay gold targets and compare corpus statistics")
    p.add_argument("--corpus", default=_env("corpus"), required=_env("corpus") is None)
    p.add_argument("--stats-version", choices=VERSIONS, default=_env("stats_version", None), help="default: version recorded by preprocess")
    p.add_argument("--require-stats", action="store_true", default=_env("require_stats", False, bool), help="fail on any statistics mismatch")
    return parser


def _load(path: str, split: str | None = None):
    meta, records = read_corpus(path)
    if split:
        records = [r for r in records if r.split == split]
    return meta, records


def cmd_preprocess(args: argparse.Namespace) -> dict:
    records = load_corpus(args.input, args.mwz_version)
    if not args.no_label_fix:
        records = [normalize_labels(r) for r in records]
    bad = separator_violations(records)
    if bad:
        log.warning("%d values contain ';'; extract targets with --escape", len(bad))
    meta = {"version": args.mwz_version, "label_fix": not args.no_label_fix, "source": os.path.abspath(args.input)}
    write_corpus(args.out, records, **meta)
    return {"dialogues": len(records), "turns": sum(len(r.turns) for r in records), "separator_violations": len(bad), **meta}


def cmd_extract_ops(args: argparse.Namespace) -> dict:
    meta, records = _load(args.corpus, args.split)
    cfg = ContextConfig.preset(args.context, shuffle_state_rows=args.shuffle_rows)

    def rows():
        for record in records:
            for t, (context, target) in enumerate(emit_training_targets(record, cfg, args.seed, args.escape)):
                yield {"dialogue_id": record.id, "turn": t, "split": record.split, "input": context, "target": target}

    out_meta = make_meta(
        "pairs", corpus=args.corpus, corpus_version=meta.get("version"), context=args.context, config=asdict(cfg), seed=args.seed, escape=args.escape
    )
    count = write_jsonl(args.out, out_meta, rows())
    return {"pairs": count, "out": args.out}


def cmd_track(args: argparse.Namespace) -> dict:
    meta, records = _load(args.corpus, args.split)
    cfg = ContextConfig.preset(args.context)
    gen = make_generator(args.generator, records, cfg, args.seed, args.timeout)
    options = TrackingOptions(args.retries, args.schema_filter, args.none_deletes)
    src = StateSource.GOLD if args.state_source == "gold" else StateSource.PREDICTED
    start = time.perf_counter()
    try:
        results = track_corpus(records, gen, cfg, src, options, workers=args.workers)
    finally:
        close = getattr(gen, "close", None)
        if close:
            close()
    elapsed = time.perf_counter() - start
    out_meta = make_meta(
        "run",
        corpus=args.corpus,
        corpus_version=meta.get("version"),
        generator=args.generator,
        deterministic=bool(getattr(gen, "deterministic", False)),
        state_source=args.state_source,
        context=args.context,
        config=asdict(cfg),
        seed=args.seed,
        options=asdict(options),
    )
    write_jsonl(args.out, out_meta, (r.to_json() for r in results))
    return {"dialogues": len(results), "turns": sum(len(r.turns) for r in results), "seconds": round(elapsed, 3), "out": args.out}


def cmd_eval(args: argparse.Namespace) -> dict:
    run_meta, rows = read_jsonl(args.run)
    if run_meta and run_meta.get("kind") != "run":
        raise UsageError(f"{args.run} is a {run_meta.get('kind')!r} file, not a tracking run")
    _, records = read_corpus(args.corpus)
    by_id = {r.id: r for r in records}
    preds, golds, ids = [], [], []
    for row in rows:
        record = by_id.get(row["id"])
        if record is None:
            raise UsageError(f"run contains dialogue {row['id']} which is not in {args.corpus}")
        preds.append([DialogueState(turn["state"]) for turn in row["turns"]])
        golds.append(list(record.states))
        ids.append(row["id"])
    report = evaluate_run(preds, golds, schema_filter=args.schema_filter, ids=ids)
    out_meta = make_meta("report", run=args.run, corpus=args.corpus, schema_filter=args.schema_filter, run_meta=run_meta)
    write_jsonl(
        args.report,
        out_meta,
        [{"summary": report.summary()}, *({"slot": row} for row in report.slot_rows()), *({"error": e} for e in report.error_dump())],
    )
    print(report.render())
    return report.summary()


def cmd_bench(args: argparse.Namespace) -> dict:
    meta, records = _load(args.corpus)
    cfg = ContextConfig.preset(args.context)
    profile = profile_corpus(records, cfg, args.representation)
    summary = profile.summary()
    header = ["representation", "measure", "median", "mean", "p25", "p75", "min", "max"]
    table = [
        [args.representation, name, *(summary[name][k] for k in header[2:])]
        for name in ("input_tokens", "output_tokens", "input_chars", "output_chars")
        if name in summary
    ]
    out_meta = make_meta("bench", corpus=args.corpus, corpus_version=meta.get("version"), representation=args.representation, context=args.context)
    if args.out:
        write_tsv(args.out, out_meta, header, table)
    if args.dump:
        write_jsonl(args.dump, out_meta, profile.distribution())
    print("\t".join(header))
    for row in table:
        print("\t".join(f"{v:.2f}" if isinstance(v, float) else str(v) for v in row))
    result = {"summary": summary, "itc": itc_check(records).to_json()}
    if args.throughput:
        result["engine_throughput"] = engine_throughput(records)
    return result


def cmd_validate(args: argparse.Namespace) -> dict:
    meta, records = read_corpus(args.corpus)
    failures = replay_failures(records)
    unstable = [
        (r.id, t) for r in records for t, s in enumerate(r.states)
        if meta.get("label_fix", True) and normalize_state(s) != s
    ]
    version = args.stats_version or meta.get("version")
    stats = compute_statistics(records)
    mismatches = compare_statistics(stats, version) if version else ["no MultiWoz version recorded; pass --stats-version"]
    result = {
        "dialogues": len(records),
        "turns": sum(len(r.turns) for r in records),
        "replay_failures": len(failures),
        "replay_failure_examples": failures[:20],
        "normalization_unstable_turns": len(unstable),
        "stats_version": version,
        "stats_match": not mismatches,
        "stats_mismatches": mismatches[:50],
        "totals": stats.totals(),
    }
    if failures or unstable or (args.require_stats and mismatches):
        raise ValidationFailed(result)
    return result


COMMANDS = {
    "preprocess": cmd_preprocess,
    "extract-ops": cmd_extract_ops,
    "track": cmd_track,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "validate": cmd_validate,
}


def _fail(command: str, kind: str, message: str, code: int, **extra: Any) -> int:
    print(json.dumps({"error": kind, "command": command, "message": message, **extra}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        result = COMMANDS[args.command](args)
    except ValidationFailed as exc:
        return _fail(args.command, "validation", str(exc), 1, result=exc.result)
    except DatasetError as exc:
        return _fail(args.command, "dataset", exc.message, 2, dialogue=exc.dialogue_id, path=exc.path)
    except (UsageError, ValueError, KeyError) as exc:
        return _fail(args.command, "contract", str(exc), 2)
    except FileNotFoundError as exc:
        return _fail(args.command, "missing-file", str(exc), 2)
    except OSError as exc:
        return _fail(args.command, "io", str(exc), 2)
    print(json.dumps(result, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
