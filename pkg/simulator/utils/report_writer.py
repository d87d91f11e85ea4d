"""
Report Writer Module for the QEC Simulator

Writes subcommand results as CSV (pandas) and JSON artifacts. Output is a
pure function of the results: no timestamps, sorted keys, fixed float
formatting, so reruns are byte-identical.
"""

import os
import json
import math
import logging
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy, complex and pydantic values to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "dict") and callable(value.dict):
        return to_jsonable(value.dict())
    return value


def generate_csv_report(frame: pd.DataFrame, path: str) -> str:
    """
    Write a CSV with a header row, fixed column order and newline line endings.
    """
    frame.to_csv(path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def generate_json_report(config: Dict[str, Any], results: Any, diagnostics: Dict[str, Any], path: str) -> str:
    payload = {"config": to_jsonable(config), "results": to_jsonable(results), "diagnostics": to_jsonable(diagnostics)}
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2, allow_nan=False)
        handle.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_reports(subcommand: str, output_path: str, config: Dict[str, Any], frame: Optional[pd.DataFrame] = None,
                  results: Any = None, diagnostics: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """
    Write <output_path>/<subcommand>.csv and .json.

    Returns:
        Mapping format -> written path
    """
    os.makedirs(output_path, exist_ok=True)
    written = {}
    if frame is not None:
        written["csv"] = generate_csv_report(frame, os.path.join(output_path, f"{subcommand}.csv"))
    written["json"] = generate_json_report(
        config, results if results is not None else {}, diagnostics or {},
        os.path.join(output_path, f"{subcommand}.json"),
    )
    return written
