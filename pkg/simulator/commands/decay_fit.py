"""
decay-fit subcommand

Fits the decay exponent of the connected correlation for every configured
spectral exponent and pulse count, next to the predicted 2(s + 1 + 2n).
"""

import logging
from typing import Any, Dict

import pandas as pd

from ..schemas.bath import BathSpec
from ..schemas.run_config import RunConfig
from ..utils.ope_analysis import decay_exponent
from .common import emit
from .correlations import correlation_series, fit_series, pulse_counts

logger = logging.getLogger(__name__)

COLUMNS = ["s", "pulses", "source", "fitted_exponent", "exponent_stderr", "predicted_exponent", "amplitude", "r_squared"]


def run(config: RunConfig) -> Dict[str, Any]:
    exact = config.mode != "ope"
    sources = ("exact", "ope") if exact else ("ope",)
    rows = []
    for s in config.s_values:
        bath = BathSpec(s=s, lam=config.lam, omega_c=config.omega_c, v_b=config.v_b)
        for n_pulses in pulse_counts(config):
            series = correlation_series(config, bath, n_pulses, exact)
            for source in sources:
                fit = fit_series(series, "exact_connected" if source == "exact" else "ope_predicted", config.delta)
                rows.append({
                    "s": s,
                    "pulses": n_pulses,
                    "source": source,
                    "fitted_exponent": fit["exponent"] if fit else None,
                    "exponent_stderr": fit["exponent_stderr"] if fit else None,
                    "predicted_exponent": decay_exponent(s, n_pulses),
                    "amplitude": fit["amplitude"] if fit else None,
                    "r_squared": fit["r_squared"] if fit else None,
                })
    frame = pd.DataFrame(rows, columns=COLUMNS)
    unfitted = int(frame["fitted_exponent"].isna().sum())
    return emit("decay_fit", config, frame, {"fits": len(frame)}, {"unfitted": unfitted})
