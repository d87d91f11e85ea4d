import math

import numpy as np
import pytest

from simulator.schemas.bath import BathSpec
from simulator.schemas.qec import CycleSchedule
from simulator.utils.bath_field import (
    ContinuumKernel,
    DiscreteKernel,
    correlation_kernel,
    epsilon,
    mode_discretize,
    pulsed_epsilon,
    tabulate_kernel,
)
from simulator.utils import cache
from simulator.utils.cache import cache_stats, cached_call, clear_cache, generate_cache_key, set_cached_result
from simulator.utils.errors import DomainError, KernelDivergenceError


@pytest.mark.parametrize("lam", [0.05, 0.1])
@pytest.mark.parametrize("wd", np.logspace(-2, 4, 13))
def test_epsilon_ohmic_closed_form(lam, wd):
    bath = BathSpec(s=1.0, lam=lam, omega_c=1.0)
    expected = lam ** 2 / 2 * math.log1p(wd ** 2)
    assert epsilon(bath, wd) == pytest.approx(expected, rel=1e-12)
    assert epsilon(bath, wd, method="quadrature") == pytest.approx(expected, rel=1e-6)


def test_epsilon_vanishes_without_coupling():
    assert epsilon(BathSpec(s=1.0, lam=0.0), 100.0) == 0.0


def test_epsilon_needs_positive_duration(bath):
    with pytest.raises(DomainError):
        epsilon(bath, 0.0)


def test_epsilon_grows_with_duration(bath):
    values = [epsilon(bath, d) for d in (1.0, 10.0, 100.0)]
    assert values == sorted(values)


def test_quadrature_matches_analytic_subohmic():
    bath = BathSpec(s=0.5, lam=1.0, omega_c=1.0)
    analytic = ContinuumKernel(bath).h(3.0)
    quadrature = ContinuumKernel(bath, method="quadrature").h(3.0)
    assert abs(quadrature - analytic) <= 1e-6 * abs(analytic)


def test_one_over_f_limit_is_real_only():
    bath = BathSpec(s=0.0, lam=0.1, omega_c=1.0)
    kernel = ContinuumKernel(bath)
    with pytest.raises(KernelDivergenceError):
        kernel.h(1.0)
    x = 10.0
    assert kernel.h_real(x) == pytest.approx(x * math.atan(x) - 0.5 * math.log1p(x * x), rel=1e-12)
    quadrature = ContinuumKernel(bath, method="quadrature").h_real(x)
    assert quadrature == pytest.approx(kernel.h_real(x), rel=1e-6)
    assert epsilon(bath, 10.0) > 0


def test_one_over_f_table_leaves_imaginary_part_undefined():
    frame = tabulate_kernel(BathSpec(s=0.0, lam=0.1), [0.0], [1.0, 10.0])
    assert frame["ImC"].isna().all()
    assert (frame["ReC"] < 0).all()


def test_subohmic_real_part_ignores_infrared_cutoff():
    bath = BathSpec(s=0.5, lam=1.0, omega_c=1.0)
    coarse = ContinuumKernel(bath, method="quadrature", ir_cutoff=1e-6)
    fine = ContinuumKernel(bath, method="quadrature", ir_cutoff=5e-7)
    assert fine.h_real(10.0) == pytest.approx(coarse.h_real(10.0), rel=1e-6)
    assert fine.h_real(10.0) == pytest.approx(ContinuumKernel(bath).h_real(10.0), rel=1e-6)
    assert fine.real_increment(0.0, 100.0) == pytest.approx(coarse.real_increment(0.0, 100.0), rel=1e-6)


def test_increment_is_even_in_space(kernel):
    assert kernel.increment(3.0, 7.0) == pytest.approx(kernel.increment(-3.0, 7.0))


def test_increment_matrix_diagonal_is_zero(kernel):
    matrix = kernel.increment_matrix([0.0, 1.0, 5.0], [0.0, 2.0, 4.0])
    np.testing.assert_allclose(np.diag(matrix), 0.0, atol=1e-15)
    # reversing the time order conjugates the increment
    np.testing.assert_allclose(matrix, matrix.T.conj(), atol=1e-12)


def test_correlation_kernel_reference_point(bath):
    assert correlation_kernel(bath, 0.0, 0.0) == 0j


def test_h_derivative_matches_finite_difference(kernel):
    tau, step = 5.0, 1e-5
    numeric = (kernel.h(tau + step) - kernel.h(tau - step)) / (2 * step)
    assert abs(kernel.h_derivative(1, tau) - numeric) < 1e-8


def test_discrete_modes_reproduce_continuum(bath):
    modes = mode_discretize(bath, 400, 40.0)
    assert all(weight >= 0 for _, weight in modes)
    discrete = DiscreteKernel(bath, modes).increment(0.0, 10.0)
    continuum = ContinuumKernel(bath).increment(0.0, 10.0)
    assert abs(discrete - continuum) < 1e-6


def test_mode_discretize_warns_on_short_band(bath, caplog):
    mode_discretize(bath, 8, 2.0)
    assert "below 5 omega_c" in caplog.text


def test_mode_discretize_rejects_empty(bath):
    with pytest.raises(DomainError):
        mode_discretize(bath, 0, 10.0)


def test_pulsed_epsilon_without_pulses_is_epsilon(bath):
    assert pulsed_epsilon(bath, CycleSchedule(delta=100.0)) == pytest.approx(epsilon(bath, 100.0), rel=1e-12)


def test_pulsed_epsilon_mid_cycle_pulse(bath):
    delta = 100.0
    value = pulsed_epsilon(bath, CycleSchedule.decoupling(delta, 1))
    expected = bath.lam ** 2 / 2 * (4 * math.log1p(delta ** 2 / 4) - math.log1p(delta ** 2))
    assert value == pytest.approx(expected, rel=1e-10)


def test_tabulate_kernel_layout(bath):
    frame = tabulate_kernel(bath, [0.0, 1.0], [0.1, 1.0, 10.0])
    assert list(frame.columns) == ["dx", "dt", "ReC", "ImC"]
    assert len(frame) == 6
    assert (frame["ReC"] <= 0).all()


def test_quadrature_values_are_cached():
    clear_cache()
    bath = BathSpec(s=0.5, lam=1.0)
    kernel = ContinuumKernel(bath, method="quadrature")
    kernel.h([1.0, 2.0])
    before = cache_stats()["hits"]
    kernel.h([1.0, 2.0])
    assert cache_stats()["hits"] == before + 2


def test_cache_key_is_order_independent():
    assert generate_cache_key("h", {"a": 1, "b": 2.0}) == generate_cache_key("h", {"b": 2.0, "a": 1})
    assert cached_call(lambda: 41 + 1, "answer", {"x": 1}) == 42
    assert cached_call(lambda: 0, "answer", {"x": 1}) == 42
    assert clear_cache("answer") == 1


def test_cache_evicts_oldest_entries(monkeypatch):
    monkeypatch.setattr(cache, "MAX_ENTRIES", 2)
    before = cache_stats()["evictions"]
    keys = [generate_cache_key("h", {"tau": float(index)}) for index in range(3)]
    for index, key in enumerate(keys):
        set_cached_result(key, complex(index))
    assert cache_stats()["entries"] == 2
    assert cache_stats()["evictions"] == before + 1
    assert cache.get_cached_result(keys[0]) is None
    assert cache.get_cached_result(keys[2]) == 2


@pytest.mark.parametrize("fields", [{"s": -1.0}, {"s": -3.0}, {"lam": -0.1}, {"omega_c": 0.0}, {"v_b": -1.0}])
def test_bath_spec_rejects_out_of_domain(fields):
    with pytest.raises(DomainError) as info:
        BathSpec(**fields)
    assert info.value.exit_code == 65
