"""
histories subcommand

exact: enumerates every syndrome history of N cycles with its probability
and logical density matrix. montecarlo: samples histories cycle by cycle.
ope: leading-order per-cycle constants and the two-error probability.
"""

import logging
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from ..schemas.run_config import RunConfig
from ..utils.errors import NumericalConsistencyError
from ..utils.ope_analysis import effective_coefficients, p2_components
from ..utils.qec_dynamics import enumerate_histories, sample_histories
from .common import build_model, emit

logger = logging.getLogger(__name__)

PROBABILITY_SLACK = 1e-12
RHO_TOLERANCE = 1e-8

EXACT_COLUMNS = ["history", "probability", "rho_00", "rho_01_re", "rho_01_im", "rho_11", "degenerate", "imag_residual"]


def _checked_probability(value: float, history: str) -> float:
    if value < -PROBABILITY_SLACK or value > 1.0 + PROBABILITY_SLACK:
        raise NumericalConsistencyError(f"history {history} has probability {value:.17g} outside [0, 1]",
                                        {"history": history, "probability": value})
    return min(max(value, 0.0), 1.0)


def _check_rho(rho: np.ndarray, history: str):
    hermitian = float(np.max(np.abs(rho - rho.conj().T)))
    trace = abs(float(np.trace(rho).real) - 1.0)
    lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if hermitian > RHO_TOLERANCE or trace > RHO_TOLERANCE or lowest < -RHO_TOLERANCE:
        raise NumericalConsistencyError(
            f"density matrix of history {history} is not a state",
            {"hermitian": hermitian, "trace": trace, "min_eigenvalue": lowest},
        )


def _exact(config: RunConfig) -> Dict[str, Any]:
    model = build_model(config)
    results = enumerate_histories(config.cycles, model, config.alpha, config.beta, config.history_limit)
    rows: List[Dict[str, Any]] = []
    degenerate = 0
    for history, result in results:
        key = history.to_string()
        row = {"history": key, "probability": _checked_probability(result.probability, key),
               "rho_00": None, "rho_01_re": None, "rho_01_im": None, "rho_11": None,
               "degenerate": result.rho is None, "imag_residual": result.diagnostics["imag_residual"]}
        if result.rho is None:
            degenerate += 1
        else:
            rho = np.array(result.rho, dtype=complex)
            _check_rho(rho, key)
            row.update(rho_00=rho[0, 0].real, rho_01_re=rho[0, 1].real, rho_01_im=rho[0, 1].imag, rho_11=rho[1, 1].real)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=EXACT_COLUMNS)
    in_window = all(result.diagnostics.get("in_validity_window", True) for _, result in results)
    diagnostics = {"degenerate_histories": degenerate, "in_validity_window": in_window,
                   "total_probability": float(frame["probability"].sum()),
                   "max_imag_residual": float(frame["imag_residual"].max())}
    return emit("histories", config, frame, {"mode": "exact", "cycles": config.cycles, "histories": len(frame)},
                diagnostics)


def _montecarlo(config: RunConfig) -> Dict[str, Any]:
    model = build_model(config)
    frame = sample_histories(config.cycles, config.samples, config.seed, model, config.alpha, config.beta,
                             workers=config.workers)
    return emit("histories", config, frame,
                {"mode": "montecarlo", "cycles": config.cycles, "samples": config.samples, "observed": len(frame)},
                {"seed": config.seed})


def _ope(config: RunConfig) -> Dict[str, Any]:
    schedule = config.schedule()
    n_qubits = build_model(config).n
    rows = []
    for syndrome_class in ("trivial", "error"):
        operator = effective_coefficients(config.bath, schedule, syndrome_class, n_qubits, config.kernel_method)
        rows.append({"syndrome_class": syndrome_class, "const_part": operator.const_part,
                     "grad_order": operator.grad_order, "grad_coefficient": operator.grad_coefficient})
    frame = pd.DataFrame(rows, columns=["syndrome_class", "const_part", "grad_order", "grad_coefficient"])
    p2 = p2_components(config.cycles, config.bath, schedule, config.kernel_method)
    return emit("histories", config, frame, {"mode": "ope", "cycles": config.cycles, "p2": p2})


def run(config: RunConfig) -> Dict[str, Any]:
    if config.mode == "montecarlo":
        return _montecarlo(config)
    if config.mode == "ope":
        return _ope(config)
    return _exact(config)
