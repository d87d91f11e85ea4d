import math

import pytest

from simulator.schemas.bath import BathSpec
from simulator.schemas.qec import CycleSchedule
from simulator.utils.bath_field import epsilon
from simulator.utils.errors import DomainError, NotImplementedScheduleError
from simulator.utils.ope_analysis import (
    decay_exponent,
    effective_coefficients,
    fit_decay_exponent,
    fit_power_law,
    grad_order,
    ope_series,
    p2_components,
    p2_total,
    pair_correlator,
    predict_correlation,
    schedule_moments,
    two_error_probability,
)
from simulator.utils.qec_dynamics import connected_correlation

from .conftest import make_far_model


def test_unpulsed_coefficients(bath):
    delta = 100.0
    operator = effective_coefficients(bath, CycleSchedule(delta=delta))
    assert operator.grad_order == 1
    assert operator.const_part == pytest.approx(epsilon(bath, delta) / 2, rel=1e-12)
    assert operator.grad_coefficient == pytest.approx(math.pi * bath.lam ** 2 * delta ** 2 / 2, rel=1e-12)


def test_trivial_class_coefficients(bath):
    delta = 100.0
    operator = effective_coefficients(bath, CycleSchedule(delta=delta), "trivial", n_qubits=3)
    assert operator.const_part == pytest.approx(1 - 3 * epsilon(bath, delta) / 2, rel=1e-12)
    assert operator.grad_coefficient == pytest.approx(-3 * math.pi * bath.lam ** 2 * delta ** 2 / 2, rel=1e-12)


def test_mid_cycle_pulse_raises_gradient_order(bath):
    delta = 100.0
    operator = effective_coefficients(bath, CycleSchedule.decoupling(delta, 1))
    assert operator.grad_order == 2
    # charges (-1, 2, -1) at (0, delta/2, delta) give m_2 = -delta^2 / 4
    assert operator.grad_coefficient == pytest.approx(math.pi * bath.lam ** 2 * delta ** 4 / 32, rel=1e-12)


def test_two_pulse_schedule_cancels_two_moments():
    schedule = CycleSchedule.decoupling(1.0, 2)
    moments = schedule_moments(schedule)
    assert moments[0] == pytest.approx(0.0, abs=1e-12)
    assert moments[1] == pytest.approx(0.0, abs=1e-12)
    assert moments[2] == pytest.approx(0.0, abs=1e-12)
    assert grad_order(schedule)[0] == 3


def test_unequal_pulses_are_not_supported(bath):
    schedule = CycleSchedule(delta=100.0, pulses=[30.0])
    with pytest.raises(NotImplementedScheduleError):
        effective_coefficients(bath, schedule)


def test_unknown_syndrome_class(bath):
    with pytest.raises(DomainError):
        effective_coefficients(bath, CycleSchedule(), "maybe")


def test_pair_correlator_closed_form():
    assert pair_correlator(1, 10.0) == pytest.approx(1 / (2 * math.pi ** 2 * 10.0 ** 4), rel=1e-12)
    assert pair_correlator(2, 10.0) == pytest.approx(2 * (6 / (2 * math.pi)) ** 2 / 10.0 ** 8, rel=1e-12)
    with pytest.raises(DomainError):
        pair_correlator(1, 0.0)


def test_pair_correlator_from_kernel_derivatives():
    # far from the cutoff the s-dependent form follows the same power law
    bath = BathSpec(s=0.5, lam=0.1)
    ratio = pair_correlator(1, 2000.0, bath) / pair_correlator(1, 1000.0, bath)
    assert ratio == pytest.approx(2.0 ** -(2 * (0.5 + 1)), rel=1e-3)


def test_decay_exponent_values():
    assert decay_exponent(1.0, 0) == 4.0
    assert decay_exponent(1.0, 1) == 8.0
    assert decay_exponent(0.5, 1) == 7.0
    with pytest.raises(DomainError):
        decay_exponent(-1.0, 0)


def test_two_error_probability_ohmic(bath):
    delta, separation = 100.0, 800.0
    eps = epsilon(bath, delta)
    expected = (eps / 2) ** 2 + bath.lam ** 4 * delta ** 4 / (8 * separation ** 4)
    assert two_error_probability(0.0, separation, bath, CycleSchedule(delta=delta)) == pytest.approx(expected, rel=1e-12)


def test_two_error_probability_guards(bath, caplog):
    sched = CycleSchedule(delta=100.0)
    with pytest.raises(DomainError):
        two_error_probability(0.0, 50.0, bath, sched)
    diagnostics = {}
    two_error_probability(0.0, 150.0, bath, sched, diagnostics=diagnostics)
    assert diagnostics["adjacent_cycles"]
    two_error_probability(0.0, 500.0, BathSpec(lam=0.2), sched, diagnostics=diagnostics)
    assert diagnostics["strong_coupling"]


def test_p2_components(bath):
    delta, N = 100.0, 10
    sched = CycleSchedule(delta=delta)
    eps = epsilon(bath, delta)
    parts = p2_components(N, bath, sched)
    assert parts["uncorrelated"] == pytest.approx((eps / 2) ** 2 * N ** 2 / 2, rel=1e-12)
    assert parts["correlated"] == pytest.approx(bath.lam ** 4 * N / 8, rel=1e-12)
    assert p2_total(N, bath, sched) == pytest.approx(0.026636, rel=1e-3)


def test_correlated_part_matches_exact_pair_amplitude(code3):
    bath = BathSpec(s=1.0, lam=0.05)
    delta, N = 100.0, 10
    per_cycle = p2_components(N, bath, CycleSchedule(delta=delta))["correlated"] / N
    model = make_far_model(code3, bath, delta=delta)
    for d in (6, 10):
        amplitude = connected_correlation(d, model)["same_qubit"] * d ** 4
        assert amplitude == pytest.approx(per_cycle, rel=0.25)


def test_predict_correlation_ohmic(bath):
    delta = 100.0
    prediction = predict_correlation(bath, CycleSchedule(delta=delta))
    assert prediction.decay_exponent == 4.0
    assert prediction.amplitude == pytest.approx(bath.lam ** 4 * delta ** 4 / 8, rel=1e-12)


def test_fit_power_law_recovers_exponent():
    series = [(t, 3.0 * t ** -4.0) for t in (400.0, 800.0, 1200.0, 1600.0)]
    fit = fit_power_law(series)
    assert fit["exponent"] == pytest.approx(4.0, abs=1e-10)
    assert fit["amplitude"] == pytest.approx(3.0, rel=1e-8)
    assert fit["r_squared"] == pytest.approx(1.0)
    assert fit_decay_exponent(series)[0] == pytest.approx(4.0, abs=1e-10)


def test_fit_power_law_needs_points():
    with pytest.raises(DomainError):
        fit_power_law([(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)])
    with pytest.raises(DomainError):
        fit_power_law([(1.0, 1.0), (2.0, -0.5), (3.0, 0.3), (4.0, 0.2)])


def test_ope_series_exponents(bath):
    for pulses, expected in ((0, 4.0), (1, 8.0)):
        sched = CycleSchedule.decoupling(100.0, pulses)
        separations = list(range(4, 17))
        values = ope_series(separations, bath, sched)
        fit = fit_power_law([(d * 100.0, v) for d, v in zip(separations, values)])
        assert fit["exponent"] == pytest.approx(expected, abs=1e-9)


def test_subohmic_pulsed_exponent():
    bath = BathSpec(s=0.5, lam=0.05)
    sched = CycleSchedule.decoupling(100.0, 1)
    separations = list(range(40, 161, 10))
    values = ope_series(separations, bath, sched)
    fit = fit_power_law([(d * 100.0, v) for d, v in zip(separations, values)])
    assert fit["exponent"] == pytest.approx(7.0, abs=0.5)
