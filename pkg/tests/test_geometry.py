"""Distance-law geometry: pieces, breakpoints, order statistics."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from uavcov.geometry import (
    DistanceTriple,
    NetworkConfig,
    cdf_link_distance,
    distance_triple,
    joint_pdf_serving_dominant,
    make_frame,
    pdf_interferer_given_serving,
    pdf_link_distance,
    pdf_residual_interferer,
    pdf_serving_distance,
)

R_A = 10_000.0
H = 10_000.0
X0 = 4_000.0


def _frame(x0=X0, r_a=R_A, h=H):
    return make_frame(NetworkConfig(n_nodes=5, disk_radius=r_a, altitude=h), x0)


def _sample_links(rng, x0, r_a, h, size):
    """Receiver-to-node distances drawn straight from the disk definition."""
    z = r_a * np.sqrt(rng.random(size))
    phi = rng.random(size) * 2.0 * np.pi
    s2 = x0 * x0 + z * z - 2.0 * x0 * z * np.cos(phi)
    return np.sqrt(s2 + h * h)


def test_network_config_rejects_bad_fields():
    with pytest.raises(ValueError):
        NetworkConfig(n_nodes=0, disk_radius=R_A, altitude=H)
    with pytest.raises(ValueError):
        NetworkConfig(n_nodes=5, disk_radius=0.0, altitude=H)
    with pytest.raises(ValueError):
        NetworkConfig(n_nodes=5, disk_radius=R_A, altitude=-1.0)


def test_frame_breakpoints_are_the_three_corner_distances():
    frame = _frame()
    assert frame.w_m == pytest.approx(math.hypot(R_A - X0, H), rel=1e-15)
    assert frame.w_p == pytest.approx(math.hypot(R_A + X0, H), rel=1e-15)
    assert frame.d == pytest.approx(math.hypot(R_A, H), rel=1e-15)
    assert H < frame.w_m < frame.d < frame.w_p


def test_frame_rejects_offsets_outside_disk():
    with pytest.raises(ValueError):
        _frame(x0=-1.0)
    with pytest.raises(ValueError):
        _frame(x0=R_A + 1.0)


def test_cdf_support_edges():
    frame = _frame()
    assert cdf_link_distance(frame, H) == 0.0
    assert cdf_link_distance(frame, 0.5 * H) == 0.0
    assert cdf_link_distance(frame, frame.w_p) == pytest.approx(1.0, abs=1e-12)
    assert cdf_link_distance(frame, frame.w_p + 1.0) == 1.0


def test_cdf_inner_piece_is_the_area_ratio():
    # Inside w_m the disk cap is a full circle, so the CDF is quadratic.
    frame = _frame()
    for w in np.linspace(H + 1.0, frame.w_m - 1.0, 20):
        expected = (w * w - H * H) / (R_A * R_A)
        assert cdf_link_distance(frame, w) == pytest.approx(expected, rel=1e-12)


def test_cdf_is_continuous_across_the_piece_boundary():
    frame = _frame()
    eps = 1e-6
    below = cdf_link_distance(frame, frame.w_m - eps)
    above = cdf_link_distance(frame, frame.w_m + eps)
    assert abs(above - below) < 1e-8


def test_cdf_monotone_over_dense_grid():
    frame = _frame()
    grid = np.linspace(H, frame.w_p, 4001)
    values = [cdf_link_distance(frame, w) for w in grid]
    diffs = np.diff(values)
    assert np.all(diffs >= -1e-12)
    assert np.all((np.asarray(values) >= 0.0) & (np.asarray(values) <= 1.0))


def test_pdf_is_the_cdf_derivative():
    frame = _frame()
    eps = 1e-3
    for w in (H + 500.0, 0.5 * (H + frame.w_m), frame.w_m + 500.0,
              frame.d, 0.5 * (frame.d + frame.w_p)):
        fd = (cdf_link_distance(frame, w + eps) - cdf_link_distance(frame, w - eps)) / (2 * eps)
        assert pdf_link_distance(frame, w) == pytest.approx(fd, rel=1e-5, abs=1e-12)


def test_pdf_normalizes_to_one():
    frame = _frame()
    total, _ = quad(lambda w: pdf_link_distance(frame, w), H, frame.w_p,
                    points=[frame.w_m], limit=200)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_pdf_vanishes_outside_support():
    frame = _frame()
    assert pdf_link_distance(frame, H - 1.0) == 0.0
    assert pdf_link_distance(frame, frame.w_p + 1.0) == 0.0


def test_cdf_matches_empirical_distances():
    rng = np.random.default_rng(2024)
    n = 200_000
    for x0 in (0.0, 0.4 * R_A, 0.9 * R_A):
        frame = _frame(x0=x0)
        w = np.sort(_sample_links(rng, x0, R_A, H, n))
        grid = np.linspace(H + 1.0, frame.w_p - 1.0, 50)
        ecdf = np.searchsorted(w, grid, side="right") / n
        model = np.array([cdf_link_distance(frame, g) for g in grid])
        assert np.max(np.abs(ecdf - model)) < 4.0 / math.sqrt(n)


def test_origin_offset_collapses_to_single_piece():
    frame = _frame(x0=0.0)
    assert frame.w_m == pytest.approx(frame.w_p, rel=1e-15)
    for w in np.linspace(H + 1.0, frame.w_p - 1.0, 30):
        expected = (w * w - H * H) / (R_A * R_A)
        assert cdf_link_distance(frame, w) == pytest.approx(expected, rel=1e-12)


def test_serving_pdf_is_minimum_of_independent_links():
    frame = _frame()
    n_nodes = 5
    total, _ = quad(lambda r: pdf_serving_distance(frame, n_nodes, r), H, frame.w_p,
                    points=[frame.w_m], limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)

    rng = np.random.default_rng(7)
    trials = 100_000
    w = _sample_links(rng, X0, R_A, H, (trials, n_nodes))
    r = np.sort(w.min(axis=1))
    for q in (11_000.0, 12_000.0, 13_000.0):
        empirical = np.searchsorted(r, q) / trials
        model, _ = quad(lambda t: pdf_serving_distance(frame, n_nodes, t), H, q,
                        points=[frame.w_m] if frame.w_m < q else None, limit=200)
        assert empirical == pytest.approx(model, abs=4.0 / math.sqrt(trials))


def test_serving_pdf_requires_at_least_one_node():
    frame = _frame()
    with pytest.raises(ValueError):
        pdf_serving_distance(frame, 0, 11_000.0)


def test_interferer_density_is_renormalized_tail():
    frame = _frame()
    r = 11_000.0
    tail = 1.0 - cdf_link_distance(frame, r)
    for u in (11_500.0, 13_000.0, frame.d + 100.0):
        expected = pdf_link_distance(frame, u) / tail
        assert pdf_interferer_given_serving(frame, u, r) == pytest.approx(expected, rel=1e-12)
    assert pdf_interferer_given_serving(frame, r - 100.0, r) == 0.0
    total, _ = quad(lambda u: pdf_interferer_given_serving(frame, u, r), r, frame.w_p,
                    limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_joint_density_lives_on_the_ordered_wedge():
    frame = _frame()
    assert joint_pdf_serving_dominant(frame, 5, 12_000.0, 11_000.0) == 0.0
    assert joint_pdf_serving_dominant(frame, 5, 11_000.0, 12_000.0) > 0.0


def test_joint_density_normalizes():
    frame = _frame()

    def outer(u1):
        inner, _ = quad(lambda r: joint_pdf_serving_dominant(frame, 5, r, u1),
                        H, u1, points=[frame.w_m] if frame.w_m < u1 else None, limit=200)
        return inner

    total, _ = quad(outer, H, frame.w_p, points=[frame.w_m], limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_joint_density_matches_two_smallest_order_statistics():
    frame = _frame()
    n_nodes = 5
    rng = np.random.default_rng(41)
    trials = 100_000
    w = np.sort(_sample_links(rng, X0, R_A, H, (trials, n_nodes)), axis=1)
    a, b = 11_200.0, 12_400.0
    empirical = np.mean((w[:, 0] <= a) & (w[:, 1] <= b))

    def outer(u1):
        hi = min(a, u1)
        inner, _ = quad(lambda r: joint_pdf_serving_dominant(frame, n_nodes, r, u1),
                        H, hi, points=[frame.w_m] if frame.w_m < hi else None, limit=200)
        return inner

    model, _ = quad(outer, H, b, points=[frame.w_m], limit=200)
    assert empirical == pytest.approx(model, abs=4.0 / math.sqrt(trials))


def test_residual_density_is_truncated_beyond_dominant():
    frame = _frame()
    r, u1 = 10_800.0, 11_600.0
    tail = 1.0 - cdf_link_distance(frame, u1)
    for u in (11_700.0, 13_500.0):
        expected = pdf_link_distance(frame, u) / tail
        assert pdf_residual_interferer(frame, u, r, u1) == pytest.approx(expected, rel=1e-12)
    assert pdf_residual_interferer(frame, u1 - 50.0, r, u1) == 0.0
    total, _ = quad(lambda u: pdf_residual_interferer(frame, u, r, u1), u1, frame.w_p,
                    points=[frame.d], limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_distance_triple_sorts_and_validates():
    frame = _frame()
    triple = distance_triple(frame, [12_000.0, 10_700.0, 11_300.0, 13_200.0])
    assert triple.serving == 10_700.0
    assert triple.dominant == 11_300.0
    assert triple.residual == (12_000.0, 13_200.0)
    assert isinstance(triple, DistanceTriple)
    with pytest.raises(ValueError):
        distance_triple(frame, [10_500.0])
    with pytest.raises(ValueError):
        distance_triple(frame, [H - 10.0, 11_000.0])
