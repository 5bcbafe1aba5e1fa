"""tabqa-harness: train / predict / baseline / trend-report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Consumes and produces only the benchmark's file formats; no network."""

from __future__ import annotations

import argparse
import sys

from .baseline import random_row_predictions
from .config import REGIMES, config_from_sources
from .errors import HarnessError
from .predict import PredictionRun, run_predict
from .report import trend_report
from .train import run_finetune


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def cmd_train(args) -> int:
    overrides = {
        "train_path": args.train,
        "regime": args.regime,
        "task_id": args.task,
        "learning_rate": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "max_len": args.max_len,
        "seed": args.seed,
        "dim": args.dim,
        "layers": args.layers,
        "heads": args.heads,
        "ffn_dim": args.ffn_dim,
        "dropout": args.dropout,
    }
    config = config_from_sources(args.config, overrides)
    if not config.train_path:
        raise UsageError("train: --train (or train_path in the config file) is required")
    result = run_finetune(config, args.out)
    print(
        f"trained {config.regime} on {result.n_examples} examples "
        f"({len(result.dropped)} dropped by truncation); artifact at {result.artifact_path}"
    )
    return 0


def cmd_predict(args) -> int:
    run = PredictionRun(
        artifact_path=args.artifact or "",
        dataset_path=args.dataset,
        output_path=args.out,
        echo_gold=args.echo_gold,
        batch_size=args.batch_size,
    )
    if not run.echo_gold and not run.artifact_path:
        raise UsageError("predict: --artifact is required unless --echo-gold")
    path = run_predict(run)
    print(f"wrote predictions to {path}")
    return 0


def cmd_baseline(args) -> int:
    path = random_row_predictions(args.dataset, args.out, seed=args.seed)
    print(f"wrote random-row baseline predictions to {path}")
    return 0


def cmd_trend_report(args) -> int:
    payload = trend_report(args.in_mtm, args.mtm, args.out)
    print(
        f"in-mtm EM {payload['in_mtm_em']:.3f} vs mtm EM {payload['mtm_em']:.3f} "
        f"(in-mtm >= mtm: {payload['in_mtm_at_least_mtm']}) [{payload['kind']}]"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="tabqa-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a span extractor")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--train", default=None, help="training dataset JSONL")
    p.add_argument("--regime", choices=list(REGIMES), default=None)
    p.add_argument("--task", type=int, default=None, help="task id (stm regime)")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    p.add_argument("--max-len", type=int, default=None, dest="max_len")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--ffn-dim", type=int, default=None, dest="ffn_dim")
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--out", required=True, help="artifact output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="emit a predictions file for a dataset")
    p.add_argument("--artifact", default=None)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=64, dest="batch_size")
    p.add_argument("--echo-gold", action="store_true", dest="echo_gold",
                   help="debug mode: predict the answer field verbatim")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("baseline", help="random-row baseline predictions")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("trend-report", help="direction-only regime comparison")
    p.add_argument("--in-mtm", required=True, dest="in_mtm", help="scoring report (records format) of the in-mtm run")
    p.add_argument("--mtm", required=True, help="scoring report (records format) of the mtm run")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trend_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (HarnessError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
