"""
kernel subcommand

Dumps the bath correlation kernel C(dx, dt) - C(0, 0) on the configured grid.
"""

import logging
from typing import Any, Dict

from ..schemas.run_config import RunConfig
from ..utils.bath_field import tabulate_kernel
from .common import emit

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> Dict[str, Any]:
    frame = tabulate_kernel(config.bath, config.kernel_dx_values, config.kernel_dt_values, config.kernel_method)
    diagnostics = {}
    if config.s <= 0:
        # ordering part diverges; only the real part is tabulated
        diagnostics["imaginary_part_omitted"] = True
    return emit("kernel", config, frame, {"rows": len(frame)}, diagnostics)
