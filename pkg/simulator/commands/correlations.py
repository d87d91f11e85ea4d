"""
correlations subcommand

Connected two-error correlation between cycle 1 and cycle 1 + d from the
exact engine, for the unpulsed schedule and (when configured) the pulsed
one, with the leading-order prediction alongside and a power-law fit of
each exact series.
"""

import logging
from functools import partial
from typing import Any, Dict, List, Optional

import pandas as pd

from ..schemas.bath import BathSpec
from ..schemas.run_config import RunConfig
from ..utils.errors import DomainError
from ..utils.ope_analysis import decay_exponent, fit_power_law, ope_series, predict_correlation
from ..utils.parallel import run_chunks
from ..utils.qec_dynamics import connected_correlation
from .common import build_model, emit

logger = logging.getLogger(__name__)

COLUMNS = [
    "pulses", "separation", "exact_connected", "exact_connected_any", "ope_predicted",
    "separation_over_delta", "separation_omega_c",
]


def _connected_at(config: RunConfig, bath: BathSpec, n_pulses: int, separation: int) -> Dict[str, float]:
    model = build_model(config, bath, n_pulses)
    result = connected_correlation(separation, model, config.alpha, config.beta)
    return {"same_qubit": result["same_qubit"], "any_error": result["any_error"]}


def pulse_counts(config: RunConfig) -> List[int]:
    return sorted({0, config.pulses_per_cycle})


def correlation_series(config: RunConfig, bath: BathSpec, n_pulses: int, exact: bool = True) -> pd.DataFrame:
    """One row per separation in [min_separation, max_separation]."""
    separations = list(range(config.min_separation, config.max_separation + 1))
    schedule = config.schedule(n_pulses)
    predicted = ope_series(separations, bath, schedule, config.kernel_method)
    if exact:
        logger.info(f"Exact connected correlations for {len(separations)} separations, {n_pulses} pulses")
        values = run_chunks(partial(_connected_at, config, bath, n_pulses), separations, config.workers)
    else:
        values = [{"same_qubit": None, "any_error": None}] * len(separations)
    return pd.DataFrame(
        [
            {
                "pulses": n_pulses,
                "separation": d,
                "exact_connected": value["same_qubit"],
                "exact_connected_any": value["any_error"],
                "ope_predicted": ope,
                "separation_over_delta": float(d),
                "separation_omega_c": d * config.delta * bath.omega_c,
            }
            for d, value, ope in zip(separations, values, predicted)
        ],
        columns=COLUMNS,
    )


def fit_series(frame: pd.DataFrame, column: str, delta: float) -> Optional[Dict[str, float]]:
    """Power-law fit in elapsed time (separation * delta) over the positive entries of a column."""
    points = [(d * delta, float(v)) for d, v in zip(frame["separation"], frame[column]) if v is not None and v > 0]
    try:
        return fit_power_law(points)
    except DomainError as e:
        logger.warning(f"No power-law fit for {column}: {e.detail}")
        return None


def run(config: RunConfig) -> Dict[str, Any]:
    bath = config.bath
    exact = config.mode != "ope"
    frames, fits = [], {}
    for n_pulses in pulse_counts(config):
        frame = correlation_series(config, bath, n_pulses, exact)
        frames.append(frame)
        prediction = predict_correlation(bath, config.schedule(n_pulses), config.kernel_method)
        fits[str(n_pulses)] = {
            "exact": fit_series(frame, "exact_connected", config.delta) if exact else None,
            "ope": fit_series(frame, "ope_predicted", config.delta),
            "predicted_exponent": decay_exponent(bath.s, n_pulses),
            "predicted_amplitude": prediction.amplitude,
        }
    frame = pd.concat(frames, ignore_index=True)
    return emit("correlations", config, frame, {"fits": fits}, {"exact": exact})
