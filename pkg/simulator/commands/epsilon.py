"""
epsilon subcommand

Tabulates the single-error exponent over the configured cycle durations
and spectral exponents, alongside the ohmic closed form.
"""

import math
import logging
from typing import Any, Dict, Optional

import pandas as pd

from ..schemas.bath import BathSpec
from ..schemas.qec import CycleSchedule
from ..schemas.run_config import RunConfig
from ..utils.bath_field import epsilon, pulsed_epsilon
from .common import emit

logger = logging.getLogger(__name__)

COLUMNS = ["s", "lambda", "delta", "omega_c_delta", "pulses", "epsilon", "closed_form"]


def _closed_form(bath: BathSpec, delta: float, pulses: int) -> Optional[float]:
    if bath.s != 1.0 or pulses:
        return None
    return bath.lam ** 2 / 2 * math.log1p((bath.omega_c * delta) ** 2)


def run(config: RunConfig) -> Dict[str, Any]:
    rows = []
    pulses = config.pulses_per_cycle
    for s in config.s_values:
        bath = BathSpec(s=s, lam=config.lam, omega_c=config.omega_c, v_b=config.v_b)
        for delta in config.delta_values:
            if pulses:
                value = pulsed_epsilon(bath, CycleSchedule.decoupling(delta, pulses), config.kernel_method)
            else:
                value = epsilon(bath, delta, config.kernel_method)
            rows.append({
                "s": s,
                "lambda": config.lam,
                "delta": delta,
                "omega_c_delta": config.omega_c * delta,
                "pulses": pulses,
                "epsilon": value,
                "closed_form": _closed_form(bath, delta, pulses),
            })
    frame = pd.DataFrame(rows, columns=COLUMNS)
    logger.info(f"Tabulated epsilon at {len(frame)} points")
    return emit("epsilon", config, frame, {"rows": len(frame)})
