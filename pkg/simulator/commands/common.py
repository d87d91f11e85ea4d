"""
Shared plumbing for the subcommands: model construction from a RunConfig
and the standard artifact write.
"""

import logging
from typing import Any, Dict, Optional

import pandas as pd

from ..schemas.bath import BathSpec
from ..schemas.run_config import RunConfig
from ..utils.qec_dynamics import HistoryModel
from ..utils.report_writer import write_reports
from ..utils.stabilizer import load_code

logger = logging.getLogger(__name__)


def build_model(config: RunConfig, bath: Optional[BathSpec] = None, n_pulses: Optional[int] = None) -> HistoryModel:
    """HistoryModel for the configured code, qubit layout and schedule."""
    code = load_code(config.code)
    return HistoryModel(
        code,
        config.schedule(n_pulses),
        bath or config.bath,
        config.qubit_positions,
        kernel_method=config.kernel_method,
        memoryless=config.memoryless,
        factorization_radius=config.factorization_radius,
        sign_limit=config.sign_limit,
        probability_floor=config.probability_floor,
    )


def emit(subcommand: str, config: RunConfig, frame: Optional[pd.DataFrame], results: Any,
         diagnostics: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    written = write_reports(subcommand, config.output_path, config.public_dict(), frame, results, diagnostics)
    return {"subcommand": subcommand, "written": written, "results": results, "diagnostics": diagnostics or {}}
