"""
Bath Field Module for the QEC Simulator

The bosonic environment at zero temperature: spectral density
f_s(w) = w^(s-2) wc^(1-s) exp(-w/wc), the two-point kernel of the theta
field, the single-error exponent epsilon and a Gauss-Legendre mode
discretisation used by the oracles.

Everything downstream consumes the kernel through its increment

    incr(dx, dt) = C(0, 0) - C(dx, dt)
                 = 1/2 [h(dt - dx/v_b) + h(dt + dx/v_b)],
    h(tau)       = int_0^inf dw f_s(w) (1 - exp(-i w tau)),

which is finite for every s > -1 in its real part and for s > 0 in its
imaginary (ordering) part.
"""

import math
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special
from scipy.integrate import quad

from ..schemas.bath import BathSpec
from ..schemas.qec import CycleSchedule
from .cache import cached_call
from .errors import DomainError, KernelDivergenceError, NumericalError

logger = logging.getLogger(__name__)

# --- Quadrature Settings ---
QUAD_EPSREL = 1e-11
QUAD_LIMIT = 500
QUAD_UPPER = 60.0  # in units of omega_c; exp(-60) is below double precision
QUAD_ACCEPT = 1e-8  # accepted relative error estimate before raising

_S_TOL = 1e-9


def _quad(func, a: float, b: float, **kwargs) -> float:
    result = quad(func, a, b, full_output=1, epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3 and abserr > QUAD_ACCEPT * max(1.0, abs(value)):
        raise NumericalError(
            f"Spectral quadrature did not converge on [{a}, {b}]",
            diagnostics={"value": value, "abserr": abserr, "message": str(result[3])[:200]},
        )
    return value


class Kernel:
    """Increment kernel interface shared by the continuum and discrete baths."""

    bath: BathSpec

    def h(self, tau) -> np.ndarray:
        raise NotImplementedError

    def h_real(self, tau) -> np.ndarray:
        return np.real(self.h(tau))

    def h_derivative(self, order: int, tau) -> np.ndarray:
        raise NotImplementedError

    def increment(self, dx, dt) -> np.ndarray:
        """C(0,0) - C(dx, dt), complex, broadcasting over array arguments."""
        shift = np.asarray(dx, dtype=float) / self.bath.v_b
        dt = np.asarray(dt, dtype=float)
        return 0.5 * (self.h(dt - shift) + self.h(dt + shift))

    def real_increment(self, dx, dt) -> np.ndarray:
        shift = np.asarray(dx, dtype=float) / self.bath.v_b
        dt = np.asarray(dt, dtype=float)
        return 0.5 * (self.h_real(dt - shift) + self.h_real(dt + shift))

    def increment_matrix(self, xs, ts, real_only: bool = False) -> np.ndarray:
        """
        Matrix I[p, q] = incr(x_p - x_q, t_p - t_q) over a list of points.
        """
        xs = np.asarray(xs, dtype=float)
        ts = np.asarray(ts, dtype=float)
        dx = xs[:, None] - xs[None, :]
        dt = ts[:, None] - ts[None, :]
        if real_only:
            return self.real_increment(dx, dt)
        return self.increment(dx, dt)


class ContinuumKernel(Kernel):
    """
    Kernel of the continuum bath, from the closed Gamma-function form
    (method='analytic') or from adaptive QUADPACK quadrature of the spectral
    integral (method='quadrature').
    """

    def __init__(self, bath: BathSpec, method: str = "analytic", ir_cutoff: Optional[float] = None):
        if method not in ("analytic", "quadrature"):
            raise DomainError(f"Unknown kernel method '{method}'")
        if ir_cutoff is not None and method != "quadrature":
            raise DomainError("An explicit infrared cutoff needs method='quadrature'")
        self.bath = bath
        self.method = method
        self.ir_cutoff = ir_cutoff

    def cache_params(self) -> dict:
        return {"bath": self.bath.dict(), "method": self.method, "ir": self.ir_cutoff}

    # --- closed forms ---

    def _h_analytic(self, tau: np.ndarray) -> np.ndarray:
        s = self.bath.s
        x = self.bath.omega_c * tau
        z = np.log1p(1j * x)
        if abs(s - 1.0) < _S_TOL:
            return z
        # Gamma(s-1) [1 - (1+ix)^(1-s)]
        return -special.gamma(s - 1.0) * np.expm1((1.0 - s) * z)

    def _h_real_analytic(self, tau: np.ndarray) -> np.ndarray:
        s = self.bath.s
        x = self.bath.omega_c * tau
        if abs(s - 1.0) < _S_TOL:
            # complex log1p loses relative precision for small x
            return 0.5 * np.log1p(x * x)
        if abs(s) < _S_TOL:
            return x * np.arctan(x) - 0.5 * np.log1p(x * x)
        return np.real(self._h_analytic(tau))

    # --- quadrature ---

    def _h_quadrature_scalar(self, tau: float) -> complex:
        if tau == 0.0:
            return 0j
        s = self.bath.s
        x = abs(self.bath.omega_c * tau)
        u0 = 0.0 if self.ir_cutoff is None else self.ir_cutoff / self.bath.omega_c
        cut = max(u0, min(1.0 / x, QUAD_UPPER))

        def real_part(u):
            return u ** (s - 2.0) * math.exp(-u) * 2.0 * math.sin(0.5 * u * x) ** 2

        def imag_part(u):
            return u ** (s - 2.0) * math.exp(-u) * math.sin(u * x)

        def envelope(u):
            return u ** (s - 2.0) * math.exp(-u)

        re = _quad(real_part, u0, cut)
        im = _quad(imag_part, u0, cut) if s > 0 else 0.0
        if cut < QUAD_UPPER:
            re += _quad(envelope, cut, QUAD_UPPER) - _quad(envelope, cut, QUAD_UPPER, weight="cos", wvar=x)
            if s > 0:
                im += _quad(envelope, cut, QUAD_UPPER, weight="sin", wvar=x)
        sign = 1.0 if tau > 0 else -1.0
        return complex(re, sign * im)

    def _h_quadrature(self, tau: np.ndarray) -> np.ndarray:
        flat = np.asarray(tau, dtype=float).ravel()
        unique, inverse = np.unique(flat, return_inverse=True)
        params = self.cache_params()
        values = np.array([
            cached_call(lambda t=t: self._h_quadrature_scalar(float(t)), "h", {**params, "tau": float(t)})
            for t in unique
        ], dtype=complex)
        return values[inverse].reshape(np.shape(tau))

    # --- public ---

    def h(self, tau) -> np.ndarray:
        if self.bath.s <= 0:
            raise KernelDivergenceError(
                f"The ordering phase of the kernel diverges for s={self.bath.s} <= 0; only real parts are available"
            )
        tau = np.asarray(tau, dtype=float)
        return self._h_analytic(tau) if self.method == "analytic" else self._h_quadrature(tau)

    def h_real(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if self.method == "analytic":
            return self._h_real_analytic(tau)
        return np.real(self._h_quadrature(tau))

    def h_derivative(self, order: int, tau) -> np.ndarray:
        """
        d^k h / dtau^k = (-1)^(k+1) Gamma(s+k-1) (i wc)^k (1 + i wc tau)^(1-s-k).
        """
        s = self.bath.s
        if order < 1:
            raise DomainError("derivative order must be >= 1")
        if s + order - 1 <= 0:
            raise KernelDivergenceError(f"d^{order}h/dtau^{order} diverges for s={s}")
        wc = self.bath.omega_c
        tau = np.asarray(tau, dtype=float)
        base = 1.0 + 1j * wc * tau
        return (-1) ** (order + 1) * special.gamma(s + order - 1) * (1j * wc) ** order * base ** (1.0 - s - order)


class DiscreteKernel(Kernel):
    """Kernel of a finite set of modes: h(tau) = sum_m W_m (1 - exp(-i w_m tau))."""

    def __init__(self, bath: BathSpec, modes: Sequence[Tuple[float, float]]):
        self.bath = bath
        self.omegas = np.array([omega for omega, _ in modes], dtype=float)
        self.weights = np.array([weight for _, weight in modes], dtype=float)

    def h(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        phase = np.multiply.outer(tau, self.omegas)
        return np.sum(self.weights * -np.expm1(-1j * phase), axis=-1)

    def increment(self, dx, dt) -> np.ndarray:
        dx = np.asarray(dx, dtype=float)
        dt = np.asarray(dt, dtype=float)
        spatial = np.cos(np.multiply.outer(dx, self.omegas) / self.bath.v_b)
        temporal = np.exp(-1j * np.multiply.outer(dt, self.omegas))
        return np.sum(self.weights * (1.0 - spatial * temporal), axis=-1)

    def h_derivative(self, order: int, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        phase = np.exp(-1j * np.multiply.outer(tau, self.omegas))
        return -np.sum(self.weights * (-1j * self.omegas) ** order * phase, axis=-1)


def make_kernel(bath: BathSpec, method: str = "analytic") -> ContinuumKernel:
    return ContinuumKernel(bath, method=method)


def correlation_kernel(bath: BathSpec, dx: float, dt: float, method: str = "analytic") -> complex:
    """
    Two-point function C(dx, dt), referenced to C(0, 0) = 0.

    The Wightman correlator is only defined up to an (infrared divergent)
    additive constant; everything downstream consumes neutral combinations,
    for which the constant cancels. Returned value is C(dx,dt) - C(0,0).

    Args:
        bath: Bath parameters
        dx: Spatial separation
        dt: Time separation
        method: 'analytic' or 'quadrature'

    Returns:
        Complex correlator difference; the imaginary part is NaN for s <= 0
    """
    kernel = ContinuumKernel(bath, method)
    if bath.s <= 0:
        # ordering part diverges: no finite imaginary value exists
        return complex(-float(kernel.real_increment(dx, dt)), math.nan)
    return complex(-kernel.increment(dx, dt))


def epsilon(bath: BathSpec, delta: float, method: str = "analytic") -> float:
    """
    Single-error exponent eps = lambda^2 [C(0,0) - Re C(0, delta)].

    For s=1 this is (lambda^2 / 2) ln(1 + (wc delta)^2).
    """
    if delta <= 0:
        raise DomainError(f"cycle duration must be > 0, got {delta}")
    kernel = ContinuumKernel(bath, method)
    return float(bath.lam ** 2 * kernel.real_increment(0.0, delta))


def schedule_charges(schedule: CycleSchedule, start_sign: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Times and charges of the signed field increment of one cycle.

    Segment i carries sign start_sign * (-1)^i; the increment is
    sum_i sign_i [theta(tau_{i+1}) - theta(tau_i)].
    """
    times = np.array(schedule.segment_times(), dtype=float)
    n_seg = len(times) - 1
    signs = start_sign * (-1.0) ** np.arange(n_seg)
    charges = np.zeros(len(times))
    charges[:-1] -= signs
    charges[1:] += signs
    return times, charges


def pulsed_epsilon(bath: BathSpec, schedule: CycleSchedule, method: str = "analytic") -> float:
    """
    Per-cycle error exponent of a pulsed schedule, lambda^2 Var(Phi) / 2.

    Equal to epsilon() without pulses; about 3 epsilon at leading logarithm
    for a single mid-cycle pulse.
    """
    kernel = ContinuumKernel(bath, method)
    times, charges = schedule_charges(schedule)
    matrix = kernel.increment_matrix(np.zeros_like(times), times, real_only=True)
    return float(-0.5 * bath.lam ** 2 * charges @ matrix @ charges)


def spectral_density(bath: BathSpec, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return omega ** (bath.s - 2.0) * bath.omega_c ** (1.0 - bath.s) * np.exp(-omega / bath.omega_c)


def mode_discretize(bath: BathSpec, M: int, omega_max: float) -> List[Tuple[float, float]]:
    """
    Gauss-Legendre nodes on [0, omega_max] weighted by the spectral density.

    Args:
        bath: Bath parameters
        M: Number of modes
        omega_max: Upper frequency; several omega_c keeps the tail negligible

    Returns:
        List of (omega_m, weight_m), weights nonnegative
    """
    if M < 1:
        raise DomainError("mode count M must be >= 1")
    if omega_max <= 0:
        raise DomainError("omega_max must be > 0")
    if omega_max < 5 * bath.omega_c:
        logger.warning(f"omega_max={omega_max} is below 5 omega_c; the spectral tail is truncated")
    nodes, weights = np.polynomial.legendre.leggauss(M)
    omegas = 0.5 * omega_max * (nodes + 1.0)
    mode_weights = 0.5 * omega_max * weights * spectral_density(bath, omegas)
    return list(zip(omegas.tolist(), mode_weights.tolist()))


def tabulate_kernel(bath: BathSpec, dx_values: Sequence[float], dt_values: Sequence[float],
                    method: str = "analytic") -> pd.DataFrame:
    """Kernel dump with columns dx, dt, ReC, ImC (C referenced to C(0,0))."""
    rows = []
    for dx in dx_values:
        for dt in dt_values:
            value = correlation_kernel(bath, dx, dt, method)
            rows.append({"dx": float(dx), "dt": float(dt), "ReC": value.real, "ImC": value.imag})
    return pd.DataFrame(rows, columns=["dx", "dt", "ReC", "ImC"])
