"""Regime comparison report. The instruction-tuned vs plain multitask
comparison is a DIRECTION-ONLY trend observation on a toy run; it makes
no claim about magnitudes, and the report says so explicitly."""

from __future__ import annotations

import json
from pathlib import Path

TREND_LABEL = (
    "trend observation (direction only, toy-budget run; no magnitude claim)"
)


def _overall_em(report_rows_path: str | Path) -> float:
    """Pull the overall EM out of a scoring report written as records."""
    with open(report_rows_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if row.get("row") == "overall":
                return float(row["em"])
    raise ValueError(f"no overall row in {report_rows_path}")


def trend_report(in_mtm_report: str | Path, mtm_report: str | Path, output_path: str | Path) -> dict:
    in_mtm_em = _overall_em(in_mtm_report)
    mtm_em = _overall_em(mtm_report)
    payload = {
        "kind": TREND_LABEL,
        "comparison": "in-mtm in-domain EM vs mtm in-domain EM",
        "in_mtm_em": in_mtm_em,
        "mtm_em": mtm_em,
        "in_mtm_at_least_mtm": in_mtm_em >= mtm_em,
        "note": (
            "Direction-only check: instruction tuning is expected to be at "
            "least as good as the plain multitask regime in-domain. Toy "
            "budgets say nothing about magnitudes."
        ),
    }
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return payload
