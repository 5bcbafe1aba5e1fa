"""Span-extraction fine-tuning harness for table-QA benchmark files."""

from .baseline import random_row_predictions
from .config import TrainConfig, read_config_file
from .predict import PredictionRun, run_predict
from .report import trend_report
from .train import run_finetune

__version__ = "0.1.0"

__all__ = [
    "PredictionRun",
    "TrainConfig",
    "random_row_predictions",
    "read_config_file",
    "run_finetune",
    "run_predict",
    "trend_report",
]
