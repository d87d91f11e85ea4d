"""
QEC Dynamics Module for the QEC Simulator

Conditioned evolution of a phase-flip repetition code whose qubits dephase
through a shared bosonic bath. Each cycle applies

    U_k = exp(i (lambda/2) sum_j Z_j Phi_{j,k}),  Phi_{j,k} = sum_p phi_p theta(x_j, t_p),

then an instantaneous syndrome measurement and recovery. Restricted to the
code space the Kraus operator of syndrome m is diagonal in the logical
basis, with bath operators

    Omega_m^sigma = 2^-n sum_z chi_{r_m}(z) (1 + sigma chi_L(z)) V(z),
    V(z) = exp(i (lambda/2) sum_j z_j Phi_{j,k}),

sigma = +1 on |0>, -1 on |1>. Products of these become signed spin sums
(see vertex_engine.SpinSum) whose exponent is a quadratic form built from
the block matrix G[(j,k),(l,k')] = sum phi_p phi_q incr(x_j - x_l, t_p - t_q).

Pulses are handled in the toggling frame: a logical NOT flips the sign of
the following segments, and the reported density matrix is in that frame.
"""

import math
import logging
from dataclasses import dataclass, field
from functools import partial
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..schemas.bath import BathSpec
from ..schemas.qec import CycleSchedule, HistoryResult, SyndromeHistory
from ..schemas.vertex import VertexProduct
from .bath_field import ContinuumKernel, Kernel, schedule_charges
from .errors import (
    DegenerateHistoryError,
    DimensionError,
    DomainError,
    NumericalConsistencyError,
    NumericalError,
    SizeLimitError,
    StructuralError,
)
from .parallel import chunk_ranges, run_chunks
from .stabilizer import StabilizerCode, Syndrome, coset_partition
from .vertex_engine import SpinSum, TrigFactor, expand_trig_factors, signed_sum

logger = logging.getLogger(__name__)

IMAG_TOLERANCE = 1e-10
COMPLETENESS_TOLERANCE = 1e-8
SAMPLE_BLOCK = 1024

RESOLVED = "resolved"
MARGINAL = "marginal"


def _popcount(value: int) -> int:
    return bin(value).count("1")


# --- Conditioned evolution as vertex products ---

@dataclass
class ConditionedTerm:
    """coefficient * prod_j (cos or sin)(a Phi_j), multiplying the logical operator."""
    logical: str  # "I" or "Zbar"
    coefficient: complex
    support: int  # Z-string whose qubits carry sin factors
    factors: List[TrigFactor] = field(default_factory=list)


def _resolve_label(code: StabilizerCode, m: Union[int, Syndrome]) -> int:
    partition = coset_partition(code)
    if isinstance(m, Syndrome):
        if m not in partition:
            raise DomainError(f"Syndrome {m.to_string()} is not a syndrome of '{code.name}'")
        return partition[m].label
    if not 0 <= int(m) < len(partition):
        raise DomainError(f"Syndrome label {m} is out of range for '{code.name}'")
    return int(m)


def expand_cycle(code: StabilizerCode, m: Union[int, Syndrome], sched: CycleSchedule,
                 qubit_positions: Sequence[float], bath: Optional[BathSpec] = None,
                 cycle_index: int = 0) -> List[ConditionedTerm]:
    """
    Conditioned evolution of one cycle for syndrome m, as two trig-product terms.

    For the 3-qubit code and m trivial this is eta1 eta2 eta3 I - i nu1 nu2 nu3 Zbar,
    with eta_j = cos(a Phi_j), nu_j = sin(a Phi_j), a = lambda/2.

    Args:
        code: Phase-flip code
        m: Syndrome (or its label)
        sched: Pulse schedule of the cycle
        qubit_positions: One position per qubit
        bath: Sets the charge amplitude lambda/2 (units of lambda when omitted)
        cycle_index: 0-based cycle number, fixes times and the toggling sign

    Returns:
        [term on I, term on Zbar]
    """
    if len(qubit_positions) != code.n:
        raise DimensionError(f"{len(qubit_positions)} positions given for {code.n} qubits")
    label = _resolve_label(code, m)
    entry = list(coset_partition(code).values())[label]
    logical_mask = code.logical_Z.z_mask
    amplitude = (bath.lam if bath is not None else 1.0) / 2.0
    start_sign = (-1) ** (cycle_index * sched.n_pulses)
    times, charges = schedule_charges(sched, start_sign)
    times = times + cycle_index * sched.delta

    terms = []
    for logical, support in (("I", entry.recovery.z_mask), ("Zbar", entry.recovery.z_mask ^ logical_mask)):
        factors = [
            TrigFactor(kind="sin" if support >> j & 1 else "cos", amplitude=amplitude, times=list(times),
                       charges=list(charges), ordinal=0, x=float(qubit_positions[j]), site=j)
            for j in range(code.n)
        ]
        terms.append(ConditionedTerm(logical=logical, coefficient=1j ** _popcount(support), support=support, factors=factors))
    return terms


def direct_cycle_expectation(code: StabilizerCode, m: Union[int, Syndrome], sched: CycleSchedule,
                             qubit_positions: Sequence[float], bath: BathSpec, kernel: Optional[Kernel] = None,
                             parities: Tuple[int, int] = (1, 1), sign_limit: int = 24) -> complex:
    """
    <Omega_m^{sigma_L} dagger Omega_m^{sigma_R}> of a single cycle by explicit
    expansion of every cos/sin factor into vertex products.
    """
    kernel = kernel or ContinuumKernel(bath)
    terms = expand_cycle(code, m, sched, qubit_positions, bath)

    def products():
        for left, right in product(terms, terms):
            coeff = np.conj(left.coefficient * (parities[0] if left.logical == "Zbar" else 1))
            coeff *= right.coefficient * (parities[1] if right.logical == "Zbar" else 1)
            factors = [TrigFactor(**{**f.__dict__, "dagger": True, "ordinal": 0}) for f in left.factors]
            factors += [TrigFactor(**{**f.__dict__, "ordinal": 1}) for f in right.factors]
            for pattern, term in expand_trig_factors(factors):
                yield pattern, VertexProduct(insertions=term.insertions, prefactor=term.prefactor * coeff)

    return signed_sum(products(), kernel, n_factors=2 * code.n, sign_limit=sign_limit)


# --- Spin-sum model of whole histories ---

class HistoryModel:
    """
    Compiles records of resolved / marginalised cycles into SpinSums.

    A resolved cycle contributes one group of 2n spins (daggered side then
    plain side) whose weight depends on its syndrome; a marginalised cycle
    has its outcome summed, which ties both sides to one set of n spins with
    weight 2^(1-n) [chi_L(z) = sigma]. Cycles after the last resolved one
    drop out.
    """

    def __init__(self, code: StabilizerCode, schedule: CycleSchedule, bath: BathSpec,
                 qubit_positions: Sequence[float], kernel: Optional[Kernel] = None,
                 kernel_method: str = "analytic", memoryless: bool = False,
                 factorization_radius: float = math.inf, sign_limit: int = 24,
                 probability_floor: float = 1e-30):
        if len(qubit_positions) != code.n:
            raise DimensionError(f"{len(qubit_positions)} positions given for {code.n} qubits")
        self._check_dephasing_code(code)
        self.code = code
        self.schedule = schedule
        self.bath = bath
        self.positions = np.asarray(qubit_positions, dtype=float)
        self.kernel = kernel or ContinuumKernel(bath, kernel_method)
        self.memoryless = memoryless
        self.factorization_radius = factorization_radius
        self.sign_limit = sign_limit
        self.probability_floor = probability_floor

        self.n = code.n
        self.entries = list(coset_partition(code).values())
        self.recovery_masks = [entry.recovery.z_mask for entry in self.entries]
        self.logical_mask = code.logical_Z.z_mask
        # z -> -z maps the two logical parities onto each other when |L| is odd
        self.parity_symmetric = _popcount(self.logical_mask) % 2 == 1
        self.charge = bath.lam / 2.0

        self._blocks: Dict[int, np.ndarray] = {}
        self._sums: Dict[Tuple[str, ...], SpinSum] = {}
        self._conditionals: Dict[Tuple[int, ...], np.ndarray] = {}

        separations = np.abs(self.positions[:, None] - self.positions[None, :])
        close = (separations <= factorization_radius) & ~np.eye(self.n, dtype=bool)
        if np.any(close):
            logger.warning("Qubits within the factorization radius are coupled; exact sums use joint enumeration")

    @staticmethod
    def _check_dephasing_code(code: StabilizerCode):
        if any(e.x_mask for e in code.error_set) or code.logical_Z.x_mask:
            raise StructuralError(f"Code '{code.name}' needs a Z-type error set and logical Z")
        subgroup = sorted(e.z_mask for e in code.logical_subgroup)
        if subgroup != sorted({0, code.logical_Z.z_mask}):
            raise StructuralError(f"Logical subgroup of '{code.name}' must be {{I, Zbar}}")

    @property
    def n_labels(self) -> int:
        return len(self.entries)

    # --- quadratic form ---

    def block_matrix(self, n_cycles: int) -> np.ndarray:
        """G over blocks (cycle k, qubit j), index k*n + j, after memoryless / radius cuts."""
        if n_cycles in self._blocks:
            return self._blocks[n_cycles]
        xs, ts, phis, blocks = [], [], [], []
        for k in range(n_cycles):
            times, charges = schedule_charges(self.schedule, (-1) ** (k * self.schedule.n_pulses))
            for j in range(self.n):
                xs.extend([self.positions[j]] * len(times))
                ts.extend(times + k * self.schedule.delta)
                phis.extend(charges)
                blocks.extend([k * self.n + j] * len(times))
        increments = self.kernel.increment_matrix(xs, ts)
        membership = np.zeros((len(blocks), n_cycles * self.n))
        membership[np.arange(len(blocks)), blocks] = phis
        G = membership.T @ increments @ membership

        cycle = np.repeat(np.arange(n_cycles), self.n)
        qubit = np.tile(np.arange(self.n), n_cycles)
        if self.memoryless:
            G[cycle[:, None] != cycle[None, :]] = 0
        far = np.abs(self.positions[qubit][:, None] - self.positions[qubit][None, :]) > self.factorization_radius
        G[far] = 0
        self._blocks[n_cycles] = G
        return G

    def spin_sum(self, kinds: Tuple[str, ...]) -> SpinSum:
        """SpinSum for a record of cycle kinds (trailing marginalised cycles removed by the caller)."""
        if kinds in self._sums:
            return self._sums[kinds]
        K = len(kinds)
        n = self.n
        G = self.block_matrix(K)

        # exponentials in operator order: V_1^+ ... V_K^+ V_K ... V_1
        ordinals = np.repeat(np.arange(2 * K), n)
        slot_cycle = np.where(ordinals < K, ordinals, 2 * K - 1 - ordinals)
        sides = np.where(ordinals < K, -1.0, 1.0)
        slot_qubit = np.tile(np.arange(n), 2 * K)
        slot_block = slot_cycle * n + slot_qubit

        M = G[np.ix_(slot_block, slot_block)]
        earlier = ordinals[:, None] < ordinals[None, :]
        later = ordinals[:, None] > ordinals[None, :]
        pair = np.where(earlier, M, np.where(later, M.T, M.real))
        Qs = 0.5 * self.charge ** 2 * np.outer(sides, sides) * pair

        groups, sites = [], []
        var_of = {}
        for k, kind in enumerate(kinds):
            members = []
            if kind == RESOLVED:
                for side in (-1, 1):
                    for j in range(n):
                        var_of[(k, side, j)] = len(sites)
                        members.append(len(sites))
                        sites.append(j)
            elif kind == MARGINAL:
                for j in range(n):
                    var_of[(k, -1, j)] = var_of[(k, 1, j)] = len(sites)
                    members.append(len(sites))
                    sites.append(j)
            else:
                raise DomainError(f"Unknown cycle kind '{kind}'")
            groups.append(members)

        A = np.zeros((len(ordinals), len(sites)))
        for slot in range(len(ordinals)):
            A[slot, var_of[(int(slot_cycle[slot]), int(sides[slot]), int(slot_qubit[slot]))]] = 1.0
        Q = A.T @ Qs @ A
        spin_sum = SpinSum(Q, groups, sites, sign_limit=self.sign_limit)
        self._sums[kinds] = spin_sum
        return spin_sum

    # --- group weights ---

    def _walsh(self, label: int, parity: int) -> List[Tuple[int, float]]:
        scale = 2.0 ** -self.n
        r = self.recovery_masks[label]
        return [(r, scale), (r ^ self.logical_mask, parity * scale)]

    def resolved_terms(self, label: int, parities: Tuple[int, int]) -> List[Tuple[int, float]]:
        left = self._walsh(label, parities[0])
        right = self._walsh(label, parities[1])
        return [(ml | mr << self.n, cl * cr) for (ml, cl), (mr, cr) in product(left, right)]

    def marginal_terms(self, parity: int) -> List[Tuple[int, float]]:
        return [(0, 2.0 ** -self.n), (self.logical_mask, parity * 2.0 ** -self.n)]

    # --- evaluation ---

    def table(self, kinds: Sequence[str], parities: Tuple[int, int],
              labels: Optional[Sequence[Optional[Sequence[int]]]] = None,
              connected_split: bool = False) -> np.ndarray:
        """
        <A_{sigma_L}^+ A_{sigma_R}> for every combination of resolved labels.

        Args:
            kinds: RESOLVED / MARGINAL per cycle, last entry resolved
            parities: (sigma_L, sigma_R); marginal cycles need sigma_L == sigma_R
            labels: Allowed labels per cycle (None = all); ignored for marginal cycles
            connected_split: Return value(full) - value(cycle-1 couplings removed)

        Returns:
            Complex array with one axis per resolved cycle
        """
        kinds = tuple(kinds)
        if not kinds or kinds[-1] != RESOLVED:
            raise DomainError("a record must end with a resolved cycle")
        if MARGINAL in kinds and parities[0] != parities[1]:
            raise DomainError("marginalised cycles are only defined for equal parities")
        labels = labels or [None] * len(kinds)
        alternatives = []
        for k, kind in enumerate(kinds):
            if kind == RESOLVED:
                allowed = labels[k] if labels[k] is not None else range(self.n_labels)
                alternatives.append([self.resolved_terms(label, parities) for label in allowed])
            else:
                alternatives.append([self.marginal_terms(parities[0])])
        result = self.spin_sum(kinds).evaluate_many(alternatives, connected_split=[0] if connected_split else None)
        return result.reshape([len(a) for k, a in zip(kinds, alternatives) if k == RESOLVED])

    def mixed_table(self, kinds, weights: Tuple[float, float], labels=None, connected_split=False,
                    diagnostics: Optional[Dict] = None) -> np.ndarray:
        """
        |alpha|^2 table(+,+) + |beta|^2 table(-,-), checked to be real.

        The largest |Im| seen is kept in diagnostics["imag_residual"].
        """
        plus = self.table(kinds, (1, 1), labels, connected_split)
        minus = plus if self.parity_symmetric else self.table(kinds, (-1, -1), labels, connected_split)
        mixed = weights[0] * plus + weights[1] * minus
        residual = float(np.max(np.abs(mixed.imag))) if mixed.size else 0.0
        if diagnostics is not None:
            diagnostics["imag_residual"] = max(residual, diagnostics.get("imag_residual", 0.0))
        if residual > IMAG_TOLERANCE:
            raise NumericalConsistencyError(
                f"history probabilities carry an imaginary residual {residual:.3g}",
                {"imag_residual": residual},
            )
        return mixed.real

    def conditional(self, prefix: Tuple[int, ...], weights: Tuple[float, float]) -> np.ndarray:
        """P(m_k = . | prefix) from exact joint tables of the prefix, memoised."""
        if prefix in self._conditionals:
            return self._conditionals[prefix]
        k = len(prefix)
        kinds = (RESOLVED,) * (k + 1)
        labels = [[m] for m in prefix] + [None]
        joint = self.mixed_table(kinds, weights, labels).reshape(-1)
        denominator = 1.0 if k == 0 else float(
            self.mixed_table((RESOLVED,) * k, weights, [[m] for m in prefix]).reshape(-1)[0]
        )
        if denominator <= self.probability_floor:
            raise DegenerateHistoryError(f"prefix {prefix} has probability {denominator:.3g}")
        conditional = joint / denominator
        total = float(np.sum(conditional))
        if abs(total - 1.0) > COMPLETENESS_TOLERANCE:
            raise NumericalError(
                f"conditional probabilities after prefix {prefix} sum to {total:.12g}",
                {"prefix": list(prefix), "total": total},
            )
        self._conditionals[prefix] = conditional
        return conditional


def _weights(alpha: complex, beta: complex) -> Tuple[float, float]:
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if norm == 0:
        raise DomainError("alpha and beta cannot both vanish")
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"|alpha|^2 + |beta|^2 = {norm:.12g}, expected 1")
    return abs(alpha) ** 2, abs(beta) ** 2


def _check_window(model: HistoryModel, N: int) -> bool:
    inside = model.bath.lam == 0 or N < 1.0 / model.bath.lam ** 2
    if not inside:
        logger.warning(f"N={N} cycles is not small against 1/lambda^2={1.0 / model.bath.lam ** 2:.3g}")
    return inside


def history_probability(w: SyndromeHistory, model: HistoryModel, alpha: complex = 2 ** -0.5,
                        beta: complex = 2 ** -0.5, mode: str = "exact", samples: int = 10000,
                        seed: int = 12345, diagnostics: Optional[Dict] = None) -> float:
    """
    P(w) = <psi|<vac| A_w^+ A_w |vac>|psi> for the logical state alpha|0> + beta|1>.

    In montecarlo mode a history beyond the exact size limit is estimated by
    stratified sampling; the standard error goes to diagnostics.
    """
    diagnostics = diagnostics if diagnostics is not None else {}
    weights = _weights(alpha, beta)
    for label in w.w:
        if not 0 <= label < model.n_labels:
            raise DomainError(f"Syndrome label {label} is out of range")
    kinds = (RESOLVED,) * w.N
    labels = [[m] for m in w.w]
    try:
        value = float(model.mixed_table(kinds, weights, labels, diagnostics=diagnostics).reshape(-1)[0])
    except SizeLimitError:
        if mode != "montecarlo":
            raise
        spin_sum = model.spin_sum(kinds)
        value, error = 0.0, 0.0
        parities = [(1, 1)] if model.parity_symmetric else [(1, 1), (-1, -1)]
        for parity, weight in zip(parities, weights if len(parities) == 2 else (1.0,)):
            estimate, stderr = spin_sum.estimate([model.resolved_terms(m, parity) for m in w.w], samples, seed)
            value += weight * estimate.real
            error = math.hypot(error, weight * stderr)
        diagnostics["montecarlo_stderr"] = error
        logger.info(f"History {w.to_string()} estimated by sampling: {value:.6g} +- {error:.2g}")
    return value


def _coherence(model: HistoryModel, w: SyndromeHistory) -> complex:
    table = model.table((RESOLVED,) * w.N, (-1, 1), [[m] for m in w.w])
    return complex(table.reshape(-1)[0])


def reduced_density_matrix(w: SyndromeHistory, model: HistoryModel, alpha: complex = 2 ** -0.5,
                           beta: complex = 2 ** -0.5) -> np.ndarray:
    """
    Logical density matrix after history w (toggling frame).

    Diagonal (|alpha|^2, |beta|^2) for pure dephasing; off-diagonal
    alpha beta* <A_-^+ A_+> / P(w).
    """
    weights = _weights(alpha, beta)
    kinds = (RESOLVED,) * w.N
    labels = [[m] for m in w.w]
    plus = float(model.table(kinds, (1, 1), labels).reshape(-1)[0].real)
    minus = plus if model.parity_symmetric else float(model.table(kinds, (-1, -1), labels).reshape(-1)[0].real)
    probability = weights[0] * plus + weights[1] * minus
    if probability < model.probability_floor:
        raise DegenerateHistoryError(f"history {w.to_string()} has probability {probability:.3g}")
    offdiag = alpha * np.conj(beta) * _coherence(model, w) / probability
    return np.array([
        [weights[0] * plus / probability, offdiag],
        [np.conj(offdiag), weights[1] * minus / probability],
    ], dtype=complex)


def enumerate_histories(N: int, model: HistoryModel, alpha: complex = 2 ** -0.5, beta: complex = 2 ** -0.5,
                        history_limit: int = 5) -> List[Tuple[SyndromeHistory, HistoryResult]]:
    """
    Every syndrome history of N cycles with probability and density matrix.

    Histories are listed with cycle 1 varying slowest; probabilities sum to
    one within 1e-8. Histories below the probability floor carry rho=None
    and a 'degenerate' flag.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if N > history_limit:
        raise SizeLimitError(f"{model.n_labels}^{N} histories requested", "history_limit", history_limit)
    weights = _weights(alpha, beta)
    in_window = _check_window(model, N)
    kinds = (RESOLVED,) * N
    logger.info(f"Enumerating {model.n_labels ** N} histories of {N} cycles")

    plus_table = model.table(kinds, (1, 1))
    minus_table = plus_table if model.parity_symmetric else model.table(kinds, (-1, -1))
    mixed = weights[0] * plus_table + weights[1] * minus_table
    residuals = np.abs(mixed.imag)
    largest = float(residuals.max())
    if largest > IMAG_TOLERANCE:
        raise NumericalConsistencyError(f"history probabilities carry an imaginary residual {largest:.3g}",
                                        {"imag_residual": largest})
    plus, minus = plus_table.real, minus_table.real
    probabilities = mixed.real
    coherence = model.table(kinds, (-1, 1))

    total = math.fsum(probabilities.ravel().tolist())
    if abs(total - 1.0) > COMPLETENESS_TOLERANCE:
        raise NumericalConsistencyError(f"history probabilities sum to {total:.12g}", {"total": total})

    results = []
    for index in np.ndindex(*probabilities.shape):
        history = SyndromeHistory(w=list(index))
        probability = float(probabilities[index])
        diagnostics = {"in_validity_window": in_window, "imag_residual": float(residuals[index])}
        rho = None
        if probability < model.probability_floor:
            diagnostics["degenerate"] = True
        else:
            offdiag = alpha * np.conj(beta) * coherence[index] / probability
            rho = [
                [complex(weights[0] * plus[index] / probability), complex(offdiag)],
                [complex(np.conj(offdiag)), complex(weights[1] * minus[index] / probability)],
            ]
        results.append((history, HistoryResult(history=history, probability=probability, rho=rho, diagnostics=diagnostics)))
    return results


def memoryless_model(model: HistoryModel) -> HistoryModel:
    """Copy of a model with all couplings between different cycles removed."""
    return HistoryModel(
        model.code, model.schedule, model.bath, model.positions, kernel=model.kernel, memoryless=True,
        factorization_radius=model.factorization_radius, sign_limit=model.sign_limit,
        probability_floor=model.probability_floor,
    )


def _draw_block(model: HistoryModel, weights: Tuple[float, float], uniforms: np.ndarray) -> np.ndarray:
    """Syndrome labels for one block of uniforms, shape (samples, N)."""
    samples, N = uniforms.shape
    labels = np.zeros((samples, N), dtype=int)
    for k in range(N):
        if k == 0:
            prefixes, inverse = np.zeros((1, 0), dtype=int), np.zeros(samples, dtype=int)
        else:
            prefixes, inverse = np.unique(labels[:, :k], axis=0, return_inverse=True)
            inverse = np.asarray(inverse).reshape(-1)
        for p, prefix in enumerate(prefixes):
            cdf = np.cumsum(model.conditional(tuple(int(m) for m in prefix), weights))
            rows = inverse == p
            labels[rows, k] = np.minimum(np.searchsorted(cdf, uniforms[rows, k], side="right"), model.n_labels - 1)
        logger.debug(f"Cycle {k + 1}: {len(prefixes)} distinct prefixes")
    return labels


def sample_histories(N: int, samples: int, seed: int, model: HistoryModel, alpha: complex = 2 ** -0.5,
                     beta: complex = 2 ** -0.5, workers: int = 1) -> pd.DataFrame:
    """
    Draw histories cycle by cycle from exact conditionals given the past.

    Uniforms come from one SeedSequence child per block of 1024 samples and
    each block is labelled on its own, so the draw does not depend on the
    number of workers.

    Returns:
        DataFrame (history, count, frequency, stderr), one row per observed history
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    weights = _weights(alpha, beta)
    _check_window(model, N)
    blocks = chunk_ranges(samples, SAMPLE_BLOCK)
    children = np.random.SeedSequence(seed).spawn(len(blocks))
    uniforms = [np.random.default_rng(child).random((len(block), N)) for block, child in zip(blocks, children)]
    labels = np.concatenate(run_chunks(partial(_draw_block, model, weights), uniforms, workers))

    keys = ["-".join(str(m) for m in row) for row in labels]
    counts = pd.Series(keys).value_counts()
    frame = pd.DataFrame({"history": counts.index, "count": counts.values})
    frame = frame.sort_values("history", kind="mergesort").reset_index(drop=True)
    frame["frequency"] = frame["count"] / samples
    frame["stderr"] = np.sqrt(frame["frequency"] * (1.0 - frame["frequency"]) / samples)
    return frame


def connected_correlation(separation: int, model: HistoryModel, alpha: complex = 2 ** -0.5,
                          beta: complex = 2 ** -0.5) -> Dict[str, object]:
    """
    Connected syndrome correlation between cycle 1 and cycle 1 + separation.

    C(a, b) = P(a, b) - P(a) P(b), computed without cancellation as
    D(a, b) - P(a) sum_a' D(a', b), where D removes every coupling of
    cycle 1 to the rest before subtracting.

    Returns:
        dict with 'table' (labels x labels), 'same_qubit' (mean over qubits of
        C(Z_j, Z_j)) and 'any_error' (sum over nontrivial labels)
    """
    if separation < 1:
        raise DomainError("separation must be >= 1 cycle")
    weights = _weights(alpha, beta)
    kinds = (RESOLVED,) + (MARGINAL,) * (separation - 1) + (RESOLVED,)
    difference = model.mixed_table(kinds, weights, connected_split=True)
    first = model.mixed_table((RESOLVED,), weights)
    table = difference - np.outer(first, difference.sum(axis=0))

    single = [entry.label for entry in model.entries if entry.recovery.weight == 1]
    same_qubit = float(np.mean([table[label, label] for label in single])) if single else 0.0
    any_error = float(table[1:, 1:].sum())
    return {"separation": separation, "table": table, "same_qubit": same_qubit, "any_error": any_error}
