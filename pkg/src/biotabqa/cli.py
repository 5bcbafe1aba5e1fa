"""Command-line entry point.

Subcommands: validate, templates export, generate, split, linearize,
oracle answer, oracle batch, score, perturb, stats, exemplar. Exit codes:
0 success, 1 usage error, 2 data error, 3 internal error. All randomness
flows from --seed; outputs are deterministic per seed. Every
file-producing run writes one manifest alongside its outputs (manifests
carry timestamps and durations, so they are the one non-reproducible
artifact). BIOTAB_LOG sets the log level and nothing else is read from
the environment.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import BiotabError, DataError
from .evaluation import (
    load_predictions,
    render_report_table,
    report_records,
    score_predictions,
)
from .generator import (
    GenerationPolicy,
    generate_dataset,
    dataset_stats,
    read_dataset_records,
    record_to_instance,
    records_to_dataset,
    instance_to_record,
)
from .instructions import (
    PerturbationKind,
    assemble_model_input,
    attach_instructions,
    budget_check,
    build_instruction,
    perturb_records,
    select_exemplar,
)
from .jsonl import write_jsonl
from .oracle import execute_query, oracle_answer, parse_question, query_from_slots
from .splits import build_split, configured_split, spec_to_dict
from .tables import linearize_table, load_corpus, scan_corpus
from .templates import template_catalog, template_record

log = logging.getLogger("biotabqa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit 1
        raise UsageError(f"{self.prog}: {message}")


def parse_task_spec(spec: str) -> set[int]:
    """Parse "1-22", "1,4,7" or "1-3,9,15-16" into a task-id set."""
    tasks: set[int] = set()
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk:
            lo, _, hi = chunk.partition("-")
            try:
                tasks.update(range(int(lo), int(hi) + 1))
            except ValueError as exc:
                raise UsageError(f"bad task range {chunk!r}") from exc
        else:
            try:
                tasks.add(int(chunk))
            except ValueError as exc:
                raise UsageError(f"bad task id {chunk!r}") from exc
    if not tasks:
        raise UsageError(f"empty task spec {spec!r}")
    return tasks


def _corpus_format(args) -> str:
    return "csv" if getattr(args, "csv", False) else "jsonl"


def _write_manifest(
    manifest_path: Path,
    command: str,
    started: float,
    seeds: dict,
    inputs: list,
    outputs: list,
    counts: dict,
    config: dict | None = None,
    extra: dict | None = None,
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seeds": seeds,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "counts": counts,
        "config": config or {},
        "duration_seconds": round(time.perf_counter() - started, 3),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def _emit(records: list[dict], out: str | None) -> None:
    if out is None:
        for rec in records:
            print(json.dumps(rec, ensure_ascii=False))
    else:
        write_jsonl(out, records)


def _policy_from_args(args) -> GenerationPolicy:
    return GenerationPolicy(
        seed=args.seed,
        combos_per_row_cap=args.cap,
        enforce_unique_answer=args.enforce_unique == "on",
        negative_pool=args.negative_pool,
    )


def _maybe_attach_instructions(records, corpus, args):
    if getattr(args, "instructions", "off") != "off":
        return attach_instructions(records, corpus, mode=args.instructions, seed=args.seed)
    return records


def _overflows(records: list[dict], budget: int) -> list[dict]:
    out = []
    for rec in records:
        text = assemble_model_input(rec["question"], rec["linearized_context"], rec.get("instruction"))
        check = budget_check(text, budget)
        if not check.fits:
            out.append({"instance_id": rec["instance_id"], "tokens": check.tokens, "budget": budget})
    return out


def cmd_validate(args) -> int:
    violations = scan_corpus(args.corpus, _corpus_format(args))
    for v in violations:
        row = f" row {v.row_index}" if v.row_index is not None else ""
        print(f"{v.severity}: table {v.table_id!r}{row}: [{v.kind.value}] {v.detail}")
    errors = [v for v in violations if v.severity == "error"]
    if errors:
        print(f"{len(errors)} error(s), {len(violations) - len(errors)} warning(s)", file=sys.stderr)
        return 2
    print(f"OK: corpus valid ({len(violations)} warning(s))")
    return 0


def cmd_templates_export(args) -> int:
    started = time.perf_counter()
    records = [template_record(spec) for spec in template_catalog()]
    _emit(records, args.out)
    if args.out:
        _write_manifest(
            Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json"),
            "templates export",
            started,
            seeds={},
            inputs=[],
            outputs=[args.out],
            counts={"templates": len(records)},
        )
    return 0


def cmd_generate(args) -> int:
    started = time.perf_counter()
    corpus = load_corpus(args.corpus, _corpus_format(args))
    tasks = parse_task_spec(args.tasks)
    policy = _policy_from_args(args)
    dataset, report = generate_dataset(corpus, tasks, policy, jobs=args.jobs)
    records = [instance_to_record(inst) for inst in dataset.instances]
    records = _maybe_attach_instructions(records, corpus, args)
    out_dir = Path(args.out)
    dataset_path = out_dir / "dataset.jsonl"
    write_jsonl(dataset_path, records)
    report_dict = report.to_dict()
    if args.budget is not None:
        report_dict["overflows"] = _overflows(records, args.budget)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report_dict, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    _write_manifest(
        out_dir / "manifest.json",
        "generate",
        started,
        seeds={"seed": args.seed},
        inputs=[args.corpus],
        outputs=[dataset_path, report_path],
        counts={"instances": len(records), "skips": len(report.skips)},
        config={
            "tasks": sorted(tasks),
            "enforce_unique": args.enforce_unique,
            "cap": args.cap,
            "negative_pool": args.negative_pool,
            "instructions": args.instructions,
            "budget": args.budget,
            "jobs": args.jobs,
            "config_file": getattr(args, "config_echo", {}),
        },
    )
    print(f"wrote {len(records)} instances to {dataset_path}")
    return 0


def cmd_split(args) -> int:
    started = time.perf_counter()
    corpus = load_corpus(args.corpus, _corpus_format(args))
    spec = configured_split(args.canonical, args.fraction, args.seed, args.cross_table_source)
    policy = _policy_from_args(args)
    result = build_split(corpus, spec, policy, jobs=args.jobs)
    out_dir = Path(args.out)
    outputs = []
    counts = {}
    for part_name, dataset in (("train", result.train), ("iid_test", result.iid_test), ("cross_test", result.cross_test)):
        records = [instance_to_record(inst) for inst in dataset.instances]
        records = _maybe_attach_instructions(records, corpus, args)
        path = out_dir / f"{part_name}.jsonl"
        write_jsonl(path, records)
        outputs.append(path)
        counts[part_name] = len(records)
    report_path = out_dir / "generation_report.json"
    report_path.write_text(
        json.dumps({k: v.to_dict() for k, v in result.reports.items()}, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    outputs.append(report_path)
    _write_manifest(
        out_dir / "manifest.json",
        "split",
        started,
        seeds={"seed": args.seed},
        inputs=[args.corpus],
        outputs=outputs,
        counts=counts,
        config={
            "enforce_unique": args.enforce_unique,
            "cap": args.cap,
            "negative_pool": args.negative_pool,
            "instructions": args.instructions,
            "jobs": args.jobs,
            "config_file": getattr(args, "config_echo", {}),
        },
        extra={
            "spec": spec_to_dict(spec),
            "partition": {
                "train_table_ids": list(result.table_partition[0]),
                "test_table_ids": list(result.table_partition[1]),
            },
            "stats": {name: report.to_dict() for name, report in result.stats.items()},
        },
    )
    print(f"wrote split {spec.name} to {out_dir} (train={counts['train']}, iid_test={counts['iid_test']}, cross_test={counts['cross_test']})")
    return 0


def cmd_linearize(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args))
    if args.table is not None:
        print(linearize_table(corpus.table(args.table)))
        return 0
    records = [{"table_id": t.table_id, "linearized": linearize_table(t)} for t in corpus.tables]
    _emit(records, args.out)
    return 0


def cmd_oracle_answer(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args))
    try:
        table = corpus.table(args.table)
    except KeyError:
        raise DataError(f"table {args.table!r} not in corpus") from None
    result = oracle_answer(args.question, table)
    print(json.dumps({"candidates": list(result.candidates), "unique": result.unique}, ensure_ascii=False))
    return 0


def cmd_oracle_batch(args) -> int:
    started = time.perf_counter()
    corpus = load_corpus(args.corpus, _corpus_format(args))
    records = read_dataset_records(args.dataset)
    predictions = []
    for rec in records:
        inst = record_to_instance(rec)
        table = corpus.table(inst.table_id)
        if inst.slots and args.prefer == "metadata":
            query = query_from_slots(inst.task_id, inst.slots)
        else:
            query = parse_question(inst.question)
        result = execute_query(query, table)
        predictions.append(
            {"instance_id": inst.instance_id, "prediction": result.candidates[0] if result.candidates else ""}
        )
    write_jsonl(args.out, predictions)
    _write_manifest(
        Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json"),
        "oracle batch",
        started,
        seeds={},
        inputs=[args.corpus, args.dataset],
        outputs=[args.out],
        counts={"predictions": len(predictions)},
        config={"prefer": args.prefer},
    )
    print(f"wrote {len(predictions)} predictions to {args.out}")
    return 0


def cmd_score(args) -> int:
    started = time.perf_counter()
    records = read_dataset_records(args.gold)
    instances = [record_to_instance(rec) for rec in records]
    predictions = load_predictions(args.pred)
    split = configured_split(args.canonical) if args.canonical else None
    report = score_predictions(predictions, instances, split=split, average=args.average)
    if args.format == "table":
        text = render_report_table(report)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
    else:
        _emit(report_records(report), args.out)
    if report.missing_predictions:
        log.warning("%d instance(s) had no prediction and scored 0", report.missing_predictions)
    if args.out:
        _write_manifest(
            Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json"),
            "score",
            started,
            seeds={},
            inputs=[args.gold, args.pred],
            outputs=[args.out],
            counts={"instances": len(instances), "missing_predictions": report.missing_predictions},
            config={"average": args.average, "canonical": args.canonical, "format": args.format},
        )
    return 0


def cmd_perturb(args) -> int:
    started = time.perf_counter()
    records = read_dataset_records(args.dataset)
    kind = PerturbationKind(args.kind)
    perturbed = perturb_records(records, kind, seed=args.seed, donor_task_id=args.donor)
    write_jsonl(args.out, perturbed)
    _write_manifest(
        Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json"),
        "perturb",
        started,
        seeds={"seed": args.seed},
        inputs=[args.dataset],
        outputs=[args.out],
        counts={"records": len(perturbed)},
        config={"kind": args.kind, "donor": args.donor},
    )
    print(f"wrote {len(perturbed)} perturbed records to {args.out}")
    return 0


def cmd_stats(args) -> int:
    started = time.perf_counter()
    records = read_dataset_records(args.dataset)
    report = dataset_stats(records_to_dataset(records))
    payload = report.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        _write_manifest(
            Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json"),
            "stats",
            started,
            seeds={},
            inputs=[args.dataset],
            outputs=[args.out],
            counts={"instances": report.n_instances},
        )
    else:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    return 0


def cmd_exemplar(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args))
    exemplar = select_exemplar(args.task, corpus, exclude_table_id=args.exclude_table, seed=args.seed)
    payload = {
        "task_id": exemplar.task_id,
        "table_id": exemplar.table_id,
        "row_index": exemplar.row_index,
        "question": exemplar.question,
        "answer": exemplar.answer,
    }
    if args.with_instruction:
        payload["instruction"] = build_instruction(args.task, exemplar).rendered
    print(json.dumps(payload, ensure_ascii=False))
    return 0


def _add_corpus_arg(parser, required: bool = True):
    parser.add_argument("--corpus", required=required, help="corpus file (JSONL, or CSV with --csv)")
    parser.add_argument("--csv", action="store_true", help="read the corpus as CSV")


def _add_generation_args(parser):
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--enforce-unique", choices=["on", "off"], default="on", dest="enforce_unique")
    parser.add_argument("--cap", type=int, default=None, help="max combinations per (row, template); default unlimited")
    parser.add_argument(
        "--negative-pool", choices=["same-table", "corpus-wide"], default="same-table", dest="negative_pool"
    )
    parser.add_argument(
        "--instructions", choices=["off", "fixed", "per-table"], default="off",
        help="attach per-task instruction blocks to records",
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker parallelism (output order is canonical regardless)")
    parser.add_argument("--config", default=None, help="JSON file of flag defaults; explicit flags win; echoed into the manifest")


def build_parser() -> _Parser:
    parser = _Parser(prog="biotabqa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"biotabqa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a corpus file, reporting every violation")
    _add_corpus_arg(p)
    p.set_defaults(func=cmd_validate)

    p_templates = sub.add_parser("templates", help="template catalog commands")
    tsub = p_templates.add_subparsers(dest="templates_command", required=True)
    p = tsub.add_parser("export", help="emit the 22-template catalog as JSONL records")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_templates_export)

    p = sub.add_parser("generate", help="generate a dataset from a corpus")
    _add_corpus_arg(p)
    p.add_argument("--tasks", default="1-22", help='task ids, e.g. "1-22" or "1,4,7"')
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--budget", type=int, default=None, help="flag instances whose model input exceeds this many tokens")
    _add_generation_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="materialize a canonical train/iid/cross split")
    _add_corpus_arg(p)
    p.add_argument("--canonical", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--fraction", type=float, default=None, help="train-table fraction (default 1/3)")
    p.add_argument(
        "--cross-table-source", choices=["train-tables", "test-tables", "all-tables"], default=None,
        dest="cross_table_source",
    )
    p.add_argument("--out", required=True, help="output directory")
    _add_generation_args(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("linearize", help="linearize tables to text")
    _add_corpus_arg(p)
    p.add_argument("--table", default=None, help="single table id (prints raw text)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_linearize)

    p_oracle = sub.add_parser("oracle", help="deterministic answer engine")
    osub = p_oracle.add_subparsers(dest="oracle_command", required=True)
    p = osub.add_parser("answer", help="answer one question against one table")
    _add_corpus_arg(p)
    p.add_argument("--table", required=True)
    p.add_argument("--question", required=True)
    p.set_defaults(func=cmd_oracle_answer)
    p = osub.add_parser("batch", help="answer a dataset file, emitting a predictions file")
    _add_corpus_arg(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--prefer", choices=["metadata", "parse"], default="metadata")
    p.set_defaults(func=cmd_oracle_batch)

    p = sub.add_parser("score", help="exact-match score a predictions file")
    p.add_argument("--gold", required=True, help="gold dataset file")
    p.add_argument("--pred", required=True, help="predictions file")
    p.add_argument("--canonical", type=int, choices=[1, 2, 3], default=None, help="report split macro averages")
    p.add_argument("--average", choices=["macro", "micro"], default="macro")
    p.add_argument("--format", choices=["table", "records"], default="table")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("perturb", help="rewrite dataset prompts under a perturbation kind")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=[k.value for k in PerturbationKind], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--donor", type=int, default=None, help="mismatched donor task (default: next task with a different prompt)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("stats", help="dataset statistics report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("exemplar", help="deterministic in-instruction exemplar for a task")
    _add_corpus_arg(p)
    p.add_argument("--task", type=int, required=True)
    p.add_argument("--exclude-table", default=None, dest="exclude_table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-instruction", action="store_true", dest="with_instruction")
    p.set_defaults(func=cmd_exemplar)

    return parser


def _apply_config_file(args, argv: list[str]):
    """--config FILE provides flag defaults; explicit flags win."""
    config_path = getattr(args, "config", None)
    if not config_path:
        return {}
    config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    for key, value in config.items():
        flag = f"--{key.replace('_', '-')}"
        if any(tok == flag or tok.startswith(flag + "=") for tok in argv):
            continue
        attr = key.replace("-", "_")
        if hasattr(args, attr):
            setattr(args, attr, value)
    return config


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=os.environ.get("BIOTAB_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.config_echo = _apply_config_file(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except BiotabError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
