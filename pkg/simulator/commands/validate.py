"""
validate subcommand

Runs the oracle and property suite. The report is always written; a failed
check then raises ValidationFailed so the process exits nonzero.
"""

import logging
from typing import Any, Dict

import pandas as pd

from ..schemas.run_config import RunConfig
from ..utils.errors import ValidationFailed
from ..utils.oracle import run_validation_suite
from .common import emit

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> Dict[str, Any]:
    report = run_validation_suite(config)
    frame = pd.DataFrame(
        [{key: check[key] for key in ("name", "passed", "discrepancy", "tolerance")} for check in report["checks"]],
        columns=["name", "passed", "discrepancy", "tolerance"],
    )
    failed = [check["name"] for check in report["checks"] if not check["passed"]]
    outcome = emit("validate", config, frame, report, {"failed": failed})
    if failed:
        raise ValidationFailed(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    logger.info(f"All {len(frame)} checks passed")
    return outcome
