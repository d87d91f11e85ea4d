"""
Vertex Engine Module for the QEC Simulator

Vacuum expectations of operator-ordered products of vertex operators
exp(i c theta(x, t)) via the Gaussian identity

    <e^{iA_1} ... e^{iA_M}> = exp(-1/2 sum_J <A_J^2> - sum_{J<K} <A_J A_K>),

written in increment form so the infrared constant C(0,0) cancels whenever
the total charge vanishes:

    X = 1/2 sum_{same J} c_p c_q Re I_pq + sum_{J<K} c_p c_q I_pq,
    I_pq = C(0,0) - C(x_p - x_q, t_p - t_q).

SpinSum evaluates the signed sums that the cosine/sine factors of the QEC
cycle expand into, where every exponent is a quadratic form in +-1 sign
variables.
"""

import math
import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..schemas.vertex import VertexInsertion, VertexProduct
from .bath_field import Kernel
from .errors import DomainError, SizeLimitError, StructuralError
from .parallel import compensated_sum

logger = logging.getLogger(__name__)

NEUTRALITY_TOL = 1e-12
UNDERFLOW_EXPONENT = -700.0
ROW_CHUNK = 1 << 16


def ordered_expectation(p: VertexProduct, kernel: Kernel, diagnostics: Optional[Dict] = None) -> complex:
    """
    Vacuum expectation of an ordered vertex product.

    Args:
        p: Product, insertions in operator order (leftmost first)
        kernel: Increment kernel of the bath
        diagnostics: Optional dict receiving 'non_neutral' / 'underflow' flags

    Returns:
        prefactor * exp(X); 0 for non-neutral products or underflowing exponents
    """
    diagnostics = diagnostics if diagnostics is not None else {}
    if not p.insertions:
        return complex(p.prefactor)
    total = p.total_charge
    if abs(total) > NEUTRALITY_TOL * max(1.0, sum(abs(ins.charge) for ins in p.insertions)):
        diagnostics["non_neutral"] = True
        logger.warning(f"Vertex product with net charge {total:.3g} evaluates to 0")
        return 0j

    charges = np.array([ins.charge for ins in p.insertions])
    ordinals = np.array([ins.ordinal for ins in p.insertions])
    xs = np.array([ins.x for ins in p.insertions])
    ts = np.array([ins.t for ins in p.insertions])
    increments = kernel.increment_matrix(xs, ts)

    same = ordinals[:, None] == ordinals[None, :]
    earlier = ordinals[:, None] < ordinals[None, :]
    pair = np.outer(charges, charges)
    exponent = 0.5 * np.sum(pair[same] * np.real(increments[same])) + np.sum(pair[earlier] * increments[earlier])

    if exponent.real < UNDERFLOW_EXPONENT:
        diagnostics["underflow"] = True
        return 0j
    return complex(p.prefactor) * complex(np.exp(exponent))


@dataclass
class TrigFactor:
    """cos(a Phi) or sin(a Phi) with Phi = sum_p phi_p theta(x, t_p), one exponential."""
    kind: str
    amplitude: float
    times: Sequence[float]
    charges: Sequence[float]
    ordinal: int
    x: float = 0.0
    site: int = 0
    dagger: bool = False


def expand_trig_factors(factors: Sequence[TrigFactor]) -> Iterable[Tuple[int, VertexProduct]]:
    """
    Enumerate the 2^K sign patterns of a product of K cos/sin factors.

    cos(aPhi) = 1/2 sum_s e^{i s a Phi},  sin(aPhi) = 1/(2i) sum_s s e^{i s a Phi};
    a daggered factor is complex conjugated.
    """
    ordered = sorted(factors, key=lambda f: f.ordinal)
    for pattern in range(2 ** len(ordered)):
        prefactor = 1.0 + 0j
        insertions = []
        for k, factor in enumerate(ordered):
            sign = 1 - 2 * (pattern >> k & 1)
            if factor.kind == "cos":
                coeff = 0.5 + 0j
            elif factor.kind == "sin":
                coeff = sign / 2j
            else:
                raise DomainError(f"Unknown trig factor kind '{factor.kind}'")
            if factor.dagger:
                coeff = coeff.conjugate()
            charge_sign = -sign if factor.dagger else sign
            prefactor *= coeff
            for t, phi in zip(factor.times, factor.charges):
                insertions.append(VertexInsertion(
                    site=factor.site, x=factor.x, t=t, charge=charge_sign * factor.amplitude * phi, ordinal=factor.ordinal,
                ))
        yield pattern, VertexProduct(insertions=insertions, prefactor=prefactor)


def signed_sum(products: Iterable[Tuple[int, VertexProduct]], kernel: Kernel, n_factors: int,
               sign_limit: int = 24, return_terms: bool = False):
    """
    Exact sum of ordered expectations over an enumerated sign pattern set.

    Args:
        products: (pattern id, VertexProduct) pairs
        kernel: Increment kernel
        n_factors: Number of trig factors K generating the 2^K patterns
        sign_limit: Largest K evaluated exactly
        return_terms: Also return a DataFrame (pattern, Re, Im) of the terms

    Returns:
        The complex sum, or (sum, terms) when return_terms is set
    """
    if n_factors > sign_limit:
        raise SizeLimitError(f"{n_factors} trig factors exceed exact enumeration", "sign_limit", sign_limit)
    ids, terms = [], []
    for pattern, prod_term in products:
        ids.append(pattern)
        terms.append(ordered_expectation(prod_term, kernel))
    total = compensated_sum(np.array(terms, dtype=complex))
    if return_terms:
        frame = pd.DataFrame({"pattern": ids, "Re": np.real(terms), "Im": np.imag(terms)})
        return total, frame
    return total


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """
    Unnormalised Walsh-Hadamard transform over the bits of the index:
    out[m] = sum_c (-1)^popcount(m & c) values[c].
    """
    out = np.array(values, dtype=complex)
    size = out.size
    if size & (size - 1):
        raise DomainError("Walsh-Hadamard transform needs a power-of-two length")
    h = 1
    while h < size:
        view = out.reshape(-1, 2, h)
        upper = view[:, 0, :] + view[:, 1, :]
        lower = view[:, 0, :] - view[:, 1, :]
        out = np.stack([upper, lower], axis=1).reshape(size)
        h *= 2
    return out


def spin_table(m: int) -> np.ndarray:
    """All +-1 configurations of m spins; row c has s_i = 1 - 2 * bit_i(c)."""
    codes = np.arange(2 ** m)
    bits = (codes[:, None] >> np.arange(m)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _quadratic_rows(spins: np.ndarray, Q: np.ndarray) -> np.ndarray:
    out = np.empty(spins.shape[0], dtype=complex)
    for start in range(0, spins.shape[0], ROW_CHUNK):
        block = spins[start:start + ROW_CHUNK]
        out[start:start + ROW_CHUNK] = np.einsum("ci,ij,cj->c", block, Q, block)
    return out


def _popcount_parity(masks: np.ndarray, codes: np.ndarray) -> np.ndarray:
    anded = np.bitwise_and.outer(masks, codes)
    parity = np.zeros_like(anded)
    while np.any(anded):
        parity ^= anded & 1
        anded >>= 1
    return 1.0 - 2.0 * parity


class SpinSum:
    """
    sum over s in {+-1}^V of prod_g w_g(s_g) exp(s^T Q s).

    Variables are split into groups; each group weight is given in Walsh
    form, a list of (mask, coeff) with w_g(s) = sum coeff prod_{k in mask} s_k
    over the group's local bit positions. A set of alternatives per group
    (e.g. one per syndrome) is evaluated in one pass.
    """

    def __init__(self, Q: np.ndarray, groups: Sequence[Sequence[int]], sites: Sequence[int],
                 sign_limit: int = 24):
        self.Q = np.asarray(Q, dtype=complex)
        self.groups = [list(g) for g in groups]
        self.sites = np.asarray(sites, dtype=int)
        self.sign_limit = sign_limit
        n_vars = self.Q.shape[0]
        flat = sorted(v for g in self.groups for v in g)
        if flat != list(range(n_vars)) or len(self.sites) != n_vars:
            raise StructuralError("SpinSum groups must partition the variables")
        self.group_of = np.empty(n_vars, dtype=int)
        self.local_bit = np.empty(n_vars, dtype=int)
        for g, members in enumerate(self.groups):
            for k, v in enumerate(members):
                self.group_of[v] = g
                self.local_bit[v] = k
        self.diagnostics: Dict[str, object] = {}
        self._tables: Dict[Optional[Tuple[int, ...]], list] = {}

    # --- structure ---

    @property
    def factorizable(self) -> bool:
        cross = self.sites[:, None] != self.sites[None, :]
        return not np.any(self.Q[cross] != 0)

    def _split_mask(self, early_groups: Optional[Sequence[int]]) -> Optional[np.ndarray]:
        if early_groups is None:
            return None
        early = np.isin(self.group_of, list(early_groups))
        return early[:, None] != early[None, :]

    def _weights(self, g: int, terms) -> np.ndarray:
        codes = np.arange(2 ** len(self.groups[g]))
        masks = np.array([mask for mask, _ in terms], dtype=np.int64)
        coeffs = np.array([coeff for _, coeff in terms], dtype=complex)
        return coeffs @ _popcount_parity(masks, codes)

    # --- exact joint enumeration ---

    def _joint(self, alternatives, early_groups=None):
        weight_mats, supports, spins = [], [], []
        sign_bits = 0.0
        for g, members in enumerate(self.groups):
            W = np.array([self._weights(g, terms) for terms in alternatives[g]])
            support = np.flatnonzero(np.any(np.abs(W) > 0, axis=0))
            if support.size == 0:
                return np.zeros([len(a) for a in alternatives], dtype=complex)
            weight_mats.append(W[:, support])
            supports.append(support)
            spins.append(spin_table(len(members))[support])
            sign_bits += math.log2(support.size)
        if sign_bits > self.sign_limit + 1e-9:
            raise SizeLimitError(f"joint enumeration needs {sign_bits:.0f} sign bits", "sign_limit", self.sign_limit)

        G = len(self.groups)
        shape = [len(sup) for sup in supports]
        early = set(early_groups or [])
        exponent = np.zeros(shape, dtype=complex)
        cross = np.zeros(shape, dtype=complex) if early_groups is not None else None
        for g in range(G):
            idx = self.groups[g]
            diag = np.einsum("ci,ij,cj->c", spins[g], self.Q[np.ix_(idx, idx)], spins[g])
            exponent += diag.reshape([-1 if a == g else 1 for a in range(G)])
            for h in range(g + 1, G):
                jdx = self.groups[h]
                table = 2.0 * spins[g] @ self.Q[np.ix_(idx, jdx)] @ spins[h].T
                table = table.reshape([shape[a] if a in (g, h) else 1 for a in range(G)])
                if cross is not None and ((g in early) != (h in early)):
                    cross += table
                else:
                    exponent += table

        self.diagnostics["underflow_terms"] = int(np.count_nonzero(exponent.real < UNDERFLOW_EXPONENT))
        if cross is None:
            values = np.exp(exponent)
        else:
            values = np.exp(exponent) * np.expm1(cross)

        result = values
        for g in range(G):
            result = np.tensordot(result, weight_mats[g].T, axes=([0], [0]))
        return result

    # --- per-site Walsh factorisation ---

    def _site_tables(self, early_groups=None):
        key = None if early_groups is None else tuple(sorted(early_groups))
        if key in self._tables:
            return self._tables[key]
        split = self._split_mask(early_groups)
        tables = []
        for site in np.unique(self.sites):
            members = np.flatnonzero(self.sites == site)
            if len(members) > self.sign_limit:
                raise SizeLimitError(f"site {site} carries {len(members)} sign variables", "sign_limit", self.sign_limit)
            Q_site = self.Q[np.ix_(members, members)]
            spins = spin_table(len(members))
            if split is None:
                tables.append((members, walsh_hadamard(np.exp(_quadratic_rows(spins, Q_site))), None, None))
                continue
            cut = split[np.ix_(members, members)]
            X_local = _quadratic_rows(spins, np.where(cut, 0, Q_site))
            X_cross = _quadratic_rows(spins, np.where(cut, Q_site, 0))
            full = walsh_hadamard(np.exp(X_local + X_cross))
            decoupled = walsh_hadamard(np.exp(X_local))
            difference = walsh_hadamard(np.exp(X_local) * np.expm1(X_cross))
            tables.append((members, full, decoupled, difference))
        self._tables[key] = tables
        return tables

    def _term_site_indices(self, g: int, terms, tables):
        """Per site, the Walsh index each term of group g contributes."""
        per_site = []
        for members, *_ in tables:
            position = {int(v): k for k, v in enumerate(members)}
            column = []
            for mask, _ in terms:
                index = 0
                for k, v in enumerate(self.groups[g]):
                    if mask >> k & 1 and v in position:
                        index |= 1 << position[v]
                column.append(index)
            per_site.append(np.array(column, dtype=np.int64))
        return per_site

    def _factorized(self, alternatives, early_groups=None):
        tables = self._site_tables(early_groups)
        n_sites = len(tables)
        combos = 1
        for g in range(len(self.groups)):
            combos *= max(len(terms) for terms in alternatives[g])
        if combos > 2 ** self.sign_limit:
            raise SizeLimitError(f"{combos} Walsh combinations", "sign_limit", self.sign_limit)

        prepared = []
        for g in range(len(self.groups)):
            prepared.append([
                (np.array([coeff for _, coeff in terms], dtype=complex), self._term_site_indices(g, terms, tables))
                for terms in alternatives[g]
            ])

        result = np.zeros([len(a) for a in alternatives], dtype=complex)
        for choice in product(*[range(len(a)) for a in alternatives]):
            coeff = np.ones(1, dtype=complex)
            indices = [np.zeros(1, dtype=np.int64) for _ in range(n_sites)]
            for g, r in enumerate(choice):
                group_coeff, group_indices = prepared[g][r]
                coeff = np.multiply.outer(coeff, group_coeff).ravel()
                for s in range(n_sites):
                    indices[s] = np.add.outer(indices[s], group_indices[s]).ravel()
            if early_groups is None:
                terms = coeff.copy()
                for s in range(n_sites):
                    terms *= tables[s][1][indices[s]]
            else:
                # prod A - prod B = sum_j (A_j - B_j) prod_{i<j} A_i prod_{i>j} B_i
                terms = np.zeros_like(coeff)
                for j in range(n_sites):
                    part = coeff * tables[j][3][indices[j]]
                    for i in range(n_sites):
                        if i < j:
                            part = part * tables[i][1][indices[i]]
                        elif i > j:
                            part = part * tables[i][2][indices[i]]
                    terms += part
            result[choice] = compensated_sum(terms)
        return result

    # --- public ---

    def evaluate_many(self, alternatives, connected_split: Optional[Sequence[int]] = None,
                      strategy: str = "auto") -> np.ndarray:
        """
        Sum for every combination of per-group alternatives.

        Args:
            alternatives: alternatives[g] is a list of Walsh term lists for group g
            connected_split: Group indices of an early block; when given the
                result is value(full) - value(early/late couplings removed)
            strategy: 'auto', 'joint' or 'factorized'

        Returns:
            Complex array of shape (len(alternatives[0]), ..., len(alternatives[-1]))
        """
        if len(alternatives) != len(self.groups):
            raise StructuralError("one alternatives list per group is required")
        if strategy == "auto":
            strategy = "factorized" if self.factorizable else "joint"
        if strategy == "factorized":
            if not self.factorizable:
                raise StructuralError("sites are coupled; per-site factorisation does not apply")
            return self._factorized(alternatives, connected_split)
        return self._joint(alternatives, connected_split)

    def evaluate(self, terms_per_group) -> complex:
        return complex(self.evaluate_many([[terms] for terms in terms_per_group]).ravel()[0])

    def estimate(self, terms_per_group, samples: int, seed: int) -> Tuple[complex, float]:
        """
        Stratified Monte Carlo estimate of evaluate(), unbiased.

        Strata are the supported configurations of the first group; within a
        stratum the other groups are drawn uniformly from their supports.
        Each stratum draws from its own SeedSequence child.

        Returns:
            (estimate, standard error)
        """
        weights, spins = [], []
        for g, members in enumerate(self.groups):
            w = self._weights(g, terms_per_group[g])
            support = np.flatnonzero(np.abs(w) > 0)
            if support.size == 0:
                return 0j, 0.0
            weights.append(w[support])
            spins.append(spin_table(len(members))[support])
        strata = spins[0].shape[0]
        per_stratum = max(2, -(-samples // strata))
        children = np.random.SeedSequence(seed).spawn(strata)

        total, variance = [], 0.0
        volume = float(np.prod([s.shape[0] for s in spins[1:]])) if len(spins) > 1 else 1.0
        order = [v for g in self.groups for v in g]
        Q_ordered = self.Q[np.ix_(order, order)]
        for c0 in range(strata):
            rng = np.random.default_rng(children[c0])
            picks = [np.full(per_stratum, c0)] + [rng.integers(0, s.shape[0], size=per_stratum) for s in spins[1:]]
            config = np.concatenate([spins[g][picks[g]] for g in range(len(spins))], axis=1)
            exponent = _quadratic_rows(config, Q_ordered)
            w = np.ones(per_stratum, dtype=complex)
            for g in range(1, len(spins)):
                w *= weights[g][picks[g]]
            values = weights[0][c0] * volume * w * np.exp(exponent)
            total.append(values.mean())
            spread = values - values.mean()
            variance += float(np.sum(np.abs(spread) ** 2)) / (per_stratum - 1) / per_stratum
        return compensated_sum(np.array(total)), math.sqrt(variance)
