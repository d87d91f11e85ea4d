import math

import numpy as np
import pytest

from simulator.schemas.vertex import VertexInsertion, VertexProduct
from simulator.utils.errors import DomainError, SizeLimitError, StructuralError
from simulator.utils.vertex_engine import (
    SpinSum,
    TrigFactor,
    expand_trig_factors,
    ordered_expectation,
    signed_sum,
    spin_table,
    walsh_hadamard,
)


def _pair(lam, t, x=0.0):
    return [VertexInsertion(x=x, t=t, charge=lam, ordinal=0), VertexInsertion(x=x, t=0.0, charge=-lam, ordinal=1)]


def test_empty_product_is_prefactor(kernel):
    assert ordered_expectation(VertexProduct(prefactor=0.5), kernel) == 0.5


def test_two_point_function(kernel):
    lam, t = 0.3, 10.0
    value = ordered_expectation(VertexProduct(insertions=_pair(lam, t)), kernel)
    # e^{-lam^2 I(0,t)} with I = ln(1 + i t)
    assert value == pytest.approx(np.exp(-lam ** 2 * np.log1p(1j * t)), rel=1e-12)


def test_non_neutral_product_vanishes(kernel):
    diagnostics = {}
    product = VertexProduct(insertions=[VertexInsertion(t=0.0, charge=0.2, ordinal=0)])
    assert ordered_expectation(product, kernel, diagnostics) == 0
    assert diagnostics["non_neutral"]


def test_underflow_is_flagged(kernel):
    diagnostics = {}
    product = VertexProduct(insertions=_pair(40.0, 1.0e6))
    assert ordered_expectation(product, kernel, diagnostics) == 0
    assert diagnostics["underflow"]


def test_shared_ordinal_is_symmetric(kernel):
    # both insertions in one exponential: exp(-lam^2 Re I)
    lam = 0.4
    product = VertexProduct(insertions=[
        VertexInsertion(t=5.0, charge=lam, ordinal=0), VertexInsertion(t=0.0, charge=-lam, ordinal=0),
    ])
    expected = math.exp(-lam ** 2 * 0.5 * math.log1p(25.0))
    assert ordered_expectation(product, kernel) == pytest.approx(expected, rel=1e-12)


def test_modulus_at_most_one(kernel):
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        charges = rng.normal(size=n)
        charges -= charges.mean()
        ordinals = np.sort(rng.integers(0, n, size=n))
        product = VertexProduct(insertions=[
            VertexInsertion(x=float(rng.uniform(0, 5)), t=float(rng.uniform(0, 50)), charge=float(c), ordinal=int(o))
            for c, o in zip(charges, ordinals)
        ])
        assert abs(ordered_expectation(product, kernel)) <= 1.0 + 1e-12


def test_distant_clusters_factorise(kernel):
    lam, span = 0.3, 10.0
    near, far = _pair(lam, span), _pair(lam, span, x=1.0e4)
    joint = ordered_expectation(VertexProduct(insertions=sorted(near + far, key=lambda i: i.ordinal)), kernel)
    separate = ordered_expectation(VertexProduct(insertions=near), kernel) * ordered_expectation(
        VertexProduct(insertions=far), kernel)
    assert abs(joint / separate - 1) < 1e-6


def test_expand_cos_factor_has_two_terms():
    factor = TrigFactor(kind="cos", amplitude=0.1, times=[0.0, 1.0], charges=[-1.0, 1.0], ordinal=0)
    terms = list(expand_trig_factors([factor]))
    assert len(terms) == 2
    assert all(term.prefactor == 0.5 for _, term in terms)


def test_expand_rejects_unknown_kind():
    factor = TrigFactor(kind="tan", amplitude=0.1, times=[0.0], charges=[1.0], ordinal=0)
    with pytest.raises(DomainError):
        list(expand_trig_factors([factor]))


def test_cos_squared_plus_sin_squared(kernel):
    # <cos^2 + sin^2> = 1 for the same field with symmetric ordering
    common = dict(amplitude=0.2, times=[0.0, 30.0], charges=[-1.0, 1.0])
    total = 0j
    for kind in ("cos", "sin"):
        factors = [TrigFactor(kind=kind, ordinal=0, dagger=True, **common), TrigFactor(kind=kind, ordinal=1, **common)]
        total += signed_sum(expand_trig_factors(factors), kernel, n_factors=2)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_signed_sum_returns_terms(kernel):
    factors = [TrigFactor(kind="cos", amplitude=0.2, times=[0.0, 3.0], charges=[-1.0, 1.0], ordinal=k) for k in (0, 1)]
    total, frame = signed_sum(expand_trig_factors(factors), kernel, n_factors=2, return_terms=True)
    assert list(frame.columns) == ["pattern", "Re", "Im"]
    assert len(frame) == 4
    assert total.real == pytest.approx(frame["Re"].sum())


def test_signed_sum_size_limit(kernel):
    with pytest.raises(SizeLimitError) as info:
        signed_sum(iter(()), kernel, n_factors=30, sign_limit=24)
    assert "sign_limit" in str(info.value)


def test_walsh_hadamard_matches_definition():
    values = np.arange(8, dtype=float)
    out = walsh_hadamard(values)
    for m in range(8):
        expected = sum((-1) ** bin(m & c).count("1") * values[c] for c in range(8))
        assert out[m] == pytest.approx(expected)
    with pytest.raises(DomainError):
        walsh_hadamard(np.ones(6))


def _brute_force(Q, groups, terms):
    n = Q.shape[0]
    total = 0j
    for s in spin_table(n):
        weight = 1.0 + 0j
        for members, group_terms in zip(groups, terms):
            local = s[members]
            weight *= sum(coeff * np.prod([local[k] for k in range(len(members)) if mask >> k & 1])
                          for mask, coeff in group_terms)
        total += weight * np.exp(s @ Q @ s)
    return total


def test_spin_sum_joint_matches_brute_force():
    rng = np.random.default_rng(3)
    A = rng.normal(scale=0.1, size=(4, 4)) + 1j * rng.normal(scale=0.1, size=(4, 4))
    Q = A + A.T
    groups = [[0, 1], [2, 3]]
    terms = [[(0, 0.5), (3, 0.5)], [(1, 1.0), (2, -0.25)]]
    spin_sum = SpinSum(Q, groups, sites=[0, 1, 0, 1])
    assert spin_sum.evaluate(terms) == pytest.approx(_brute_force(Q, groups, terms), rel=1e-12)


def test_spin_sum_factorised_matches_joint():
    rng = np.random.default_rng(5)
    Q = np.zeros((4, 4), dtype=complex)
    # couple variables 0,2 (site 0) and 1,3 (site 1) only
    for a, b in ((0, 2), (1, 3)):
        value = complex(rng.normal(scale=0.2), rng.normal(scale=0.2))
        Q[a, b] = Q[b, a] = value
    spin_sum = SpinSum(Q, [[0, 1], [2, 3]], sites=[0, 1, 0, 1])
    assert spin_sum.factorizable
    alternatives = [[[(0, 0.5), (3, 0.5)], [(1, 1.0)]], [[(0, 1.0)], [(2, 0.5), (3, -0.5)]]]
    joint = spin_sum.evaluate_many(alternatives, strategy="joint")
    factorised = spin_sum.evaluate_many(alternatives, strategy="factorized")
    np.testing.assert_allclose(factorised, joint, rtol=1e-12, atol=1e-14)


def test_spin_sum_connected_split_matches_joint():
    rng = np.random.default_rng(11)
    Q = np.zeros((4, 4), dtype=complex)
    for a, b in ((0, 2), (1, 3), (0, 0), (3, 3)):
        value = complex(rng.normal(scale=0.2), rng.normal(scale=0.2))
        Q[a, b] = Q[b, a] = value
    spin_sum = SpinSum(Q, [[0, 1], [2, 3]], sites=[0, 1, 0, 1])
    alternatives = [[[(0, 0.25), (3, 0.25)]], [[(0, 1.0), (1, 0.5)]]]
    joint = spin_sum.evaluate_many(alternatives, connected_split=[0], strategy="joint")
    factorised = spin_sum.evaluate_many(alternatives, connected_split=[0], strategy="factorized")
    np.testing.assert_allclose(factorised, joint, rtol=1e-10, atol=1e-14)


def test_coupled_sites_cannot_factorise():
    Q = np.full((2, 2), 0.1, dtype=complex)
    spin_sum = SpinSum(Q, [[0], [1]], sites=[0, 1])
    with pytest.raises(StructuralError):
        spin_sum.evaluate_many([[[(0, 1.0)]], [[(0, 1.0)]]], strategy="factorized")


def test_groups_must_partition_variables():
    with pytest.raises(StructuralError):
        SpinSum(np.zeros((3, 3)), [[0, 1]], sites=[0, 0, 0])


def test_estimate_is_reproducible_and_close():
    rng = np.random.default_rng(13)
    A = rng.normal(scale=0.05, size=(6, 6))
    Q = (A + A.T).astype(complex)
    groups = [[0, 1], [2, 3], [4, 5]]
    terms = [[(0, 0.25)], [(0, 0.25), (1, 0.1)], [(0, 0.25)]]
    spin_sum = SpinSum(Q, groups, sites=[0] * 6)
    first = spin_sum.estimate(terms, samples=4000, seed=99)
    second = spin_sum.estimate(terms, samples=4000, seed=99)
    assert first == second
    exact = spin_sum.evaluate(terms)
    estimate, stderr = first
    assert abs(estimate - exact) < 5 * stderr + 1e-12
