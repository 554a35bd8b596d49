from pathlib import Path
from typing import Dict, List, Tuple
import logging

import orjson
import pandas as pd

from models.harness import ErrorReport, SuiteReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "sup_abs_err", "argmax_x", "weighted_err", "skipped_cells"]


def _format_point(x) -> str:
    return ",".join(str(c) for c in x)


def report_frame(report: ErrorReport) -> pd.DataFrame:
    records = [
        {
            "n": row.n,
            "sup_abs_err": row.sup_abs_err,
            "argmax_x": _format_point(row.argmax_x),
            "weighted_err": row.weighted_err,
            "skipped_cells": row.skipped_cells,
        }
        for row in report.rows
    ]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def report_document(report: ErrorReport) -> Dict[str, object]:
    document = {
        "measure": report.measure,
        "mode": report.mode.value,
        "alpha": report.alpha,
        "rows": [
            {
                "n": row.n,
                "sup_abs_err": row.sup_abs_err,
                "argmax_x": list(row.argmax_x),
                "weighted_err": row.weighted_err,
                "skipped_cells": row.skipped_cells,
            }
            for row in report.rows
        ],
        "C_hat": report.c_hat,
        "slope": report.slope,
        "slope_stderr": report.slope_stderr,
    }
    if report.failure is not None:
        document["failed"] = report.failure
    return document


def output_paths(out: Path) -> Tuple[Path, Path]:
    """report -> (report.csv, report.json)"""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
    return stem.with_name(stem.name + ".csv"), stem.with_name(stem.name + ".json")


def write_report(report: ErrorReport, out: Path) -> List[Path]:
    csv_path, json_path = output_paths(out)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        report_frame(report).to_csv(fh, index=False, lineterminator="\n")
        if report.failure is not None:
            fh.write(f"# failed: {report.failure}\n")
    json_path.write_bytes(orjson.dumps(report_document(report), option=orjson.OPT_INDENT_2) + b"\n")
    logger.info(f"Wrote {csv_path} and {json_path}")
    return [csv_path, json_path]


def suite_document(report: SuiteReport) -> Dict[str, object]:
    return {
        "alpha": report.alpha,
        "n": report.n_list,
        "measures": [
            {"measure": e.measure, "C_hat": e.c_hat, "failed": e.failure} for e in report.entries
        ],
        "C_min": report.c_min,
        "C_max": report.c_max,
        "ratio": report.ratio,
    }


def write_suite(report: SuiteReport, out: Path) -> Path:
    out = Path(out)
    path = out if out.suffix == ".json" else out.with_name(out.name + ".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(suite_document(report), option=orjson.OPT_INDENT_2) + b"\n")
    logger.info(f"Wrote {path}")
    return path
