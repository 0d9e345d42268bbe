"""Exact fading engine: Laplace factors, derivative recurrence, coverage."""

import math

import numpy as np
import pytest

from uavcov.analytic import (
    MAX_DERIVATIVE_ORDER,
    LaplaceDerivatives,
    conditional_coverage_nakagami,
    coverage_nakagami,
    laplace_derivatives,
    laplace_interference,
    single_node_factor_derivative,
)
from uavcov.core import ChannelModel, CoverageEstimate
from uavcov.geometry import NetworkConfig, make_frame
from uavcov.quadrature import QuadratureSpec

CFG = NetworkConfig(n_nodes=5, disk_radius=10_000.0, altitude=10_000.0)
X0 = 4_000.0
FRAME = make_frame(CFG, X0)
MODEL = ChannelModel.nakagami(2.5, 1)


def test_channel_model_validation():
    with pytest.raises(ValueError):
        ChannelModel(alpha=2.0, m_serving=1, m_interferer=1)
    with pytest.raises(ValueError):
        ChannelModel(alpha=3.0, m_serving=1.5, m_interferer=1)
    with pytest.raises(ValueError):
        ChannelModel(alpha=3.0, m_serving=2, m_interferer=0.0)
    assert ChannelModel.no_fading(2.5).is_no_fading
    assert not ChannelModel.nakagami(2.5, 2).is_no_fading
    # A fractional interferer shape is legal as long as the serving one is integer.
    ChannelModel(alpha=3.0, m_serving=2, m_interferer=0.5)


def test_coverage_estimate_range_check():
    CoverageEstimate(value=0.5, ci_halfwidth=0.01, trials_or_tol=100.0)
    with pytest.raises(ValueError):
        CoverageEstimate(value=1.2, ci_halfwidth=0.0, trials_or_tol=0.0)


def test_single_factor_value_and_sign_pattern():
    s, u = 2e10, 12_000.0
    for m in (1, 2, 3):
        model = ChannelModel.nakagami(2.5, m)
        base = (1.0 + s * u ** (-2.5) / m) ** (-m)
        assert single_node_factor_derivative(0, s, u, model) == pytest.approx(base, rel=1e-13)
        for k in range(1, 6):
            value = single_node_factor_derivative(k, s, u, model)
            assert math.copysign(1.0, value) == (-1.0 if k % 2 else 1.0)


def test_single_factor_matches_finite_difference():
    u = 11_500.0
    model = ChannelModel.nakagami(3.0, 2)
    s = 0.8 / u ** (-3.0)
    ds = s * 1e-5
    for k in range(0, 3):
        fd = (
            single_node_factor_derivative(k, s + ds, u, model)
            - single_node_factor_derivative(k, s - ds, u, model)
        ) / (2.0 * ds)
        want = single_node_factor_derivative(k + 1, s, u, model)
        assert fd == pytest.approx(want, rel=1e-7)


def test_single_factor_rejects_bad_input():
    with pytest.raises(ValueError):
        single_node_factor_derivative(-1, 1.0, 1.0, MODEL)
    with pytest.raises(ValueError):
        single_node_factor_derivative(0, -1.0, 1.0, MODEL)
    with pytest.raises(ValueError):
        single_node_factor_derivative(0, 1.0, 1.0, ChannelModel.no_fading(2.5))


def test_laplace_is_a_probability_weighting():
    r = 10_500.0
    assert laplace_interference(FRAME, 5, MODEL, 0.0, r) == pytest.approx(1.0, rel=1e-10)
    previous = 1.0
    for s in (1e9, 5e9, 2e10, 1e11):
        value = laplace_interference(FRAME, 5, MODEL, s, r)
        assert 0.0 < value < 1.0
        assert value < previous
        previous = value


def test_laplace_single_node_network_is_unity():
    assert laplace_interference(FRAME, 1, MODEL, 1e10, 10_500.0) == 1.0


def test_laplace_frozen_value():
    got = laplace_interference(FRAME, 5, MODEL, 1e10, 10_500.0)
    assert got == pytest.approx(0.17952374250577374, rel=1e-9)


def test_laplace_rejects_serving_distance_outside_support():
    with pytest.raises(ValueError):
        laplace_interference(FRAME, 5, MODEL, 1e10, FRAME.altitude - 1.0)


def test_laplace_derivatives_match_finite_differences():
    r = 10_800.0
    s = 1.0 / (12_000.0 ** (-2.5))
    lap = laplace_derivatives(FRAME, 5, MODEL, s, r, 2)
    assert isinstance(lap, LaplaceDerivatives)
    tight = QuadratureSpec(abs_tol=0.0, rel_tol=1e-12)
    ds = s * 1e-4

    def L(sv):
        return laplace_interference(FRAME, 5, MODEL, sv, r, tight)

    fd1 = (L(s + ds) - L(s - ds)) / (2.0 * ds)
    fd2 = (L(s + ds) - 2.0 * L(s) + L(s - ds)) / ds**2
    assert lap.derivs[1] == pytest.approx(fd1, rel=1e-6)
    assert lap.derivs[2] == pytest.approx(fd2, rel=1e-4)


def test_laplace_derivatives_alternate_in_sign():
    s = 0.5 / (11_000.0 ** (-2.5))
    lap = laplace_derivatives(FRAME, 5, ChannelModel.nakagami(2.5, 2), s, 10_400.0, 5)
    for k, value in enumerate(lap.derivs):
        assert math.copysign(1.0, value) == (-1.0 if k % 2 else 1.0)


def test_laplace_derivatives_order_cap():
    with pytest.raises(ValueError):
        laplace_derivatives(FRAME, 5, MODEL, 1e10, 10_500.0, MAX_DERIVATIVE_ORDER + 1)


def test_conditional_coverage_limits():
    r = 10_600.0
    assert conditional_coverage_nakagami(FRAME, 5, MODEL, 1e-9, r) == pytest.approx(1.0, abs=1e-6)
    tiny = conditional_coverage_nakagami(FRAME, 5, MODEL, 1e4, r)
    assert 0.0 <= tiny < 1e-3
    values = [conditional_coverage_nakagami(FRAME, 5, MODEL, b, r)
              for b in (0.1, 0.5, 1.0, 2.0, 8.0)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_conditional_coverage_rejects_large_integer_shape():
    big = ChannelModel.nakagami(2.5, MAX_DERIVATIVE_ORDER + 2)
    with pytest.raises(ValueError):
        conditional_coverage_nakagami(FRAME, 5, big, 1.0, 10_500.0)
    with pytest.raises(ValueError):
        conditional_coverage_nakagami(FRAME, 5, ChannelModel.no_fading(2.5), 1.0, 10_500.0)


def test_coverage_frozen_values():
    # Regression anchors, each cross-checked against 4e5-trial simulation
    # (agreement well inside the binomial confidence interval).
    cases = {
        1: 0.14587907938013725,
        2: 0.08848318693201823,
        4: 0.03785143769744308,
    }
    for m, want in cases.items():
        got = coverage_nakagami(CFG, ChannelModel.nakagami(2.5, m), X0, 1.0)
        assert got.value == pytest.approx(want, rel=1e-8)
        assert got.ci_halfwidth == 0.0

    pair = NetworkConfig(n_nodes=2, disk_radius=10_000.0, altitude=10_000.0)
    got = coverage_nakagami(pair, ChannelModel.nakagami(3.0, 1), 2_000.0, 0.5)
    assert got.value == pytest.approx(0.743474845333001, rel=1e-8)


def test_coverage_single_node_is_certain():
    single = NetworkConfig(n_nodes=1, disk_radius=10_000.0, altitude=10_000.0)
    assert coverage_nakagami(single, MODEL, X0, 123.0).value == 1.0


def test_coverage_decreases_with_threshold():
    values = [coverage_nakagami(CFG, MODEL, X0, b).value for b in (0.1, 0.3, 1.0, 3.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_coverage_continuous_at_origin_offset():
    at_zero = coverage_nakagami(CFG, MODEL, 0.0, 1.0).value
    near_zero = coverage_nakagami(CFG, MODEL, 1e-4, 1.0).value
    assert at_zero == pytest.approx(near_zero, rel=1e-6)


def test_coverage_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        coverage_nakagami(CFG, MODEL, X0, 0.0)


def test_coverage_matches_fresh_simulation():
    # Independent end-to-end draw, sampled here rather than via the package
    # samplers: 5 nodes uniform on the disk, exponential gains, SIR count.
    rng = np.random.default_rng(909)
    trials = 120_000
    z = CFG.disk_radius * np.sqrt(rng.random((trials, 5)))
    phi = rng.random((trials, 5)) * 2.0 * np.pi
    s2 = X0**2 + z**2 - 2.0 * X0 * z * np.cos(phi)
    w = np.sqrt(s2 + CFG.altitude**2)
    g = rng.exponential(1.0, size=w.shape)
    power = g * w ** (-2.5)
    idx = np.argmin(w, axis=1)
    rows = np.arange(trials)
    signal = power[rows, idx]
    interference = power.sum(axis=1) - signal
    empirical = np.mean(signal > 1.0 * interference)
    got = coverage_nakagami(CFG, MODEL, X0, 1.0).value
    assert abs(got - empirical) < 4.0 * math.sqrt(empirical * (1 - empirical) / trials)
