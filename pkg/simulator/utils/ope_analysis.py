"""
OPE Analysis Module for the QEC Simulator

Leading-order operator-product predictions for the syndrome statistics of
a correlated bath. Over one cycle the signed field increment

    Phi = sum_p phi_p theta(t_p) = sum_k m_k d^k theta / dt^k,   m_k = sum_p phi_p t_p^k / k!,

is dominated by its first nonvanishing moment, so each cycle acts like a
constant plus a coefficient times :(d^k theta)^2:. Errors in distant cycles
then correlate through the Wick pairing of two such operators, decaying as
a power law whose exponent grows by 4 with every decoupling pulse.
"""

import math
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from ..schemas.bath import BathSpec
from ..schemas.qec import CycleSchedule
from ..schemas.results import CorrelationPrediction, EffectiveCycleOperator
from .bath_field import ContinuumKernel, epsilon, pulsed_epsilon, schedule_charges
from .errors import DomainError, NotImplementedScheduleError

logger = logging.getLogger(__name__)

MOMENT_TOLERANCE = 1e-9
MAX_GRAD_ORDER = 12


def schedule_moments(sched: CycleSchedule, max_order: int = MAX_GRAD_ORDER) -> np.ndarray:
    """m_k = sum_p phi_p t_p^k / k! for k = 0..max_order (t measured from the cycle start)."""
    times, charges = schedule_charges(sched)
    orders = np.arange(max_order + 1)
    factorials = special.factorial(orders)
    return np.array([np.sum(charges * times ** k) for k in orders]) / factorials


def grad_order(sched: CycleSchedule) -> Tuple[int, float]:
    """First k >= 1 with a nonvanishing moment, and that moment."""
    moments = schedule_moments(sched)
    for k in range(1, len(moments)):
        if abs(moments[k]) > MOMENT_TOLERANCE * sched.delta ** k:
            return k, float(moments[k])
    raise NotImplementedScheduleError("schedule cancels every time moment up to order 12")


def effective_coefficients(bath: BathSpec, sched: CycleSchedule, syndrome_class: str = "error",
                           n_qubits: int = 3, method: str = "analytic") -> EffectiveCycleOperator:
    """
    Effective cycle operator const + coefficient :(d^k theta)^2: for one class of syndromes.

    Args:
        bath: Bath parameters
        sched: Pulse schedule (equally weighted decoupling placements only)
        syndrome_class: 'error' (one qubit flagged) or 'trivial'
        n_qubits: Code size, entering the trivial-class aggregate
        method: Kernel evaluation method for the per-cycle error exponent

    Returns:
        EffectiveCycleOperator; no pulses gives (eps/2, 1, pi lambda^2 Delta^2 / 2)
    """
    if syndrome_class not in ("error", "trivial"):
        raise DomainError(f"syndrome class must be 'error' or 'trivial', got '{syndrome_class}'")
    order, moment = grad_order(sched)
    if order != 1 + sched.n_pulses:
        raise NotImplementedScheduleError(
            f"{sched.n_pulses} pulses at {sched.pulses} leave a gradient of order {order}, expected {1 + sched.n_pulses}"
        )
    coefficient = math.pi * bath.lam ** 2 * moment ** 2 / 2.0
    eps_sched = pulsed_epsilon(bath, sched, method) if sched.n_pulses else epsilon(bath, sched.delta, method)
    diagnostics = {"epsilon_schedule": eps_sched, "moment": moment}
    if syndrome_class == "trivial":
        return EffectiveCycleOperator(
            const_part=1.0 - n_qubits * eps_sched / 2.0, grad_order=order,
            grad_coefficient=-n_qubits * coefficient, syndrome_class="trivial", diagnostics=diagnostics,
        )
    return EffectiveCycleOperator(
        const_part=eps_sched / 2.0, grad_order=order, grad_coefficient=coefficient,
        syndrome_class="error", diagnostics=diagnostics,
    )


def pair_correlator(k: int, dt: float, bath: Optional[BathSpec] = None) -> float:
    """
    <:(d^k theta)^2(t): :(d^k theta)^2(0):> in the normalisation where k=1 gives 1/(2 pi^2 t^4).

    The ohmic bath (or no bath) uses the scale-free closed form
    2 [(2k-1)! / (2 pi)]^2 / dt^(4k); any other bath uses the time
    derivatives of its kernel, 2 |h^(2k)(dt)|^2 / (2 pi)^2.
    """
    if k < 1:
        raise DomainError("gradient order must be >= 1")
    if dt == 0:
        raise DomainError("pair correlator is singular at dt = 0")
    dt = abs(dt)
    if bath is None or abs(bath.s - 1.0) < 1e-12:
        return 2.0 * (math.factorial(2 * k - 1) / (2.0 * math.pi)) ** 2 / dt ** (4 * k)
    derivative = complex(ContinuumKernel(bath).h_derivative(2 * k, dt))
    return 2.0 * abs(derivative) ** 2 / (2.0 * math.pi) ** 2


def decay_exponent(s: float, n: int) -> float:
    """Power of the inter-cycle correlation decay, 2(s + 1 + 2n)."""
    if s <= -1:
        raise DomainError(f"spectral exponent must be > -1, got {s}")
    if n < 0:
        raise DomainError("pulse count must be >= 0")
    return 2.0 * (s + 1.0 + 2.0 * n)


def predict_correlation(bath: BathSpec, sched: CycleSchedule, method: str = "analytic") -> CorrelationPrediction:
    """
    Uncorrelated part, long-time amplitude and exponent of the two-error probability.

    amplitude * dt^-exponent is the asymptote of the correlated term.
    """
    operator = effective_coefficients(bath, sched, method=method)
    k = operator.grad_order
    exponent = decay_exponent(bath.s, sched.n_pulses)
    # |h^(m)(t)| -> Gamma(s+m-1) wc^(1-s) t^(1-s-m) for wc t >> 1
    asymptote = 2.0 * (special.gamma(bath.s + 2 * k - 1) * bath.omega_c ** (1.0 - bath.s)) ** 2 / (2.0 * math.pi) ** 2
    return CorrelationPrediction(
        uncorrelated_part=operator.const_part ** 2,
        amplitude=operator.grad_coefficient ** 2 * asymptote,
        decay_exponent=exponent,
    )


def two_error_probability(t1: float, t2: float, bath: BathSpec, sched: CycleSchedule,
                          method: str = "analytic", diagnostics: Optional[Dict] = None) -> float:
    """
    Probability of a flagged error in the cycles starting at t1 and t2.

    (eps/2)^2 + lambda^4 Delta^4 / (8 (t1 - t2)^4) for the unpulsed ohmic
    bath; pulsed schedules and other s use their own constant, coefficient
    and pair correlator.
    """
    diagnostics = diagnostics if diagnostics is not None else {}
    separation = abs(t1 - t2)
    if separation < sched.delta:
        raise DomainError(f"cycles at {t1} and {t2} overlap (delta={sched.delta})")
    if separation < 2 * sched.delta:
        logger.warning(f"separation {separation} is below 2 delta; adjacent cycles are outside the expansion")
        diagnostics["adjacent_cycles"] = True
    if bath.lam > 0.1:
        logger.warning(f"lambda={bath.lam} is above 0.1; leading-order results may be inaccurate")
        diagnostics["strong_coupling"] = True
    operator = effective_coefficients(bath, sched, method=method)
    correlated = operator.grad_coefficient ** 2 * pair_correlator(operator.grad_order, separation, bath)
    return operator.const_part ** 2 + correlated


def p2_components(N: int, bath: BathSpec, sched: CycleSchedule, method: str = "analytic") -> Dict[str, float]:
    """
    Probability of two errors of any kind within N cycles, split as

        uncorrelated = (eps/2)^2 N^2 / 2,
        correlated   = N * coefficient^2 * pair(k, Delta),

    the second being lambda^4 N / 8 for the unpulsed ohmic bath.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    operator = effective_coefficients(bath, sched, method=method)
    if bath.lam > 0 and N >= 1.0 / bath.lam ** 2:
        logger.warning(f"N={N} is not small against 1/lambda^2; two-error estimate is outside its range")
    uncorrelated = operator.const_part ** 2 * N ** 2 / 2.0
    correlated = N * operator.grad_coefficient ** 2 * pair_correlator(operator.grad_order, sched.delta, bath)
    return {"uncorrelated": uncorrelated, "correlated": correlated, "total": uncorrelated + correlated}


def p2_total(N: int, bath: BathSpec, sched: CycleSchedule, method: str = "analytic") -> float:
    return p2_components(N, bath, sched, method)["total"]


def fit_power_law(series: Sequence[Tuple[float, float]]) -> Dict[str, float]:
    """
    Least-squares fit of value = amplitude * dt^-exponent in log-log coordinates.

    Args:
        series: (dt, value) pairs, at least 4, all values > 0

    Returns:
        dict with exponent, exponent_stderr, amplitude, r_squared
    """
    if len(series) < 4:
        raise DomainError(f"power-law fit needs at least 4 points, got {len(series)}")
    dts = np.array([dt for dt, _ in series], dtype=float)
    values = np.array([value for _, value in series], dtype=float)
    if np.any(values <= 0) or np.any(dts <= 0):
        raise DomainError("power-law fit needs positive separations and values")
    fit = stats.linregress(np.log(dts), np.log(values))
    return {
        "exponent": float(-fit.slope),
        "exponent_stderr": float(fit.stderr),
        "amplitude": float(math.exp(fit.intercept)),
        "r_squared": float(fit.rvalue ** 2),
    }


def fit_decay_exponent(series: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    fit = fit_power_law(series)
    return fit["exponent"], fit["exponent_stderr"]


def ope_series(separations: List[int], bath: BathSpec, sched: CycleSchedule,
               method: str = "analytic") -> List[float]:
    """Correlated part of the two-error probability at integer cycle separations."""
    operator = effective_coefficients(bath, sched, method=method)
    return [
        operator.grad_coefficient ** 2 * pair_correlator(operator.grad_order, d * sched.delta, bath)
        for d in separations
    ]
