"""No-fading coverage via the dominant-interferer Gaussian approximation.

Conditioned on the serving and dominant-interferer distances (r, u1), the
remaining N-2 interference terms are i.i.d.; their sum is replaced by a
Gaussian with the matched conditional mean and variance, coverage becomes a
Gaussian CDF evaluation inside the (r, u1) wedge integral, and the
Berry-Esseen theorem turns the same moments plus the third absolute moment
into hard two-sided bounds whose width shrinks like (N-2)^(-1/2).

N=2 has no residual sum and is handled exactly; N=1 is coverage one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import CoverageEstimate
from .geometry import (
    GeometryFrame,
    NetworkConfig,
    cdf_link_distance,
    make_frame,
    pdf_link_distance,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate
from .specfn import gaussian_cdf

# Best known constant in the Berry-Esseen bound for i.i.d. summands.
BERRY_ESSEEN_CONSTANT = 0.4748

# Residual moments are pure functions of (frame, alpha, tolerances, u1); the
# wedge integrations revisit the same outer nodes across beta sweeps and
# blockage mixtures, so memoize.
_MOMENT_CACHE_SIZE = 1 << 17


@dataclass(frozen=True)
class ResidualMoments:
    """Conditional moments of the residual interference given (r, u1).

    mean_per_term is E[U^-alpha] for one residual interferer; mean_total and
    variance_total scale by the N-2 residual count; the third absolute
    central moment stays per-term (that is what the Berry-Esseen correction
    consumes).
    """

    mean_per_term: float
    mean_total: float
    variance_total: float
    third_abs_moment_per_term: float

    def __post_init__(self):
        if self.variance_total < 0.0 or self.third_abs_moment_per_term < 0.0:
            raise ValueError("negative residual moment")


@lru_cache(maxsize=_MOMENT_CACHE_SIZE)
def _per_term_moments(
    frame: GeometryFrame,
    alpha: float,
    tol_key: tuple[float, float, int],
    u1: float,
) -> tuple[float, float, float]:
    """(mean, variance, third abs central moment) of one residual term U^-alpha.

    The distance of one residual interferer given (r, u1) is the link-distance
    law truncated to [u1, w_p]; closed antiderivative on the inner piece for
    the mean, quadrature elsewhere, everything controlled relatively because
    the magnitudes sit at path-loss scale.
    """
    abs_tol, rel_tol, max_sub = tol_key
    spec = QuadratureSpec(
        abs_tol=0.0, rel_tol=rel_tol, max_subdivisions=max_sub
    ).with_breakpoints(frame.w_m)
    h, w_m, w_p, d = frame.altitude, frame.w_m, frame.w_p, frame.d
    if not (h <= u1 <= w_p):
        raise ValueError(f"u1={u1!r} outside [{h!r}, {w_p!r}]")
    tail = 1.0 - cdf_link_distance(frame, u1)
    if tail <= 0.0 or u1 >= w_p:
        # Support collapsed onto the far edge.
        return w_p ** (-alpha), 0.0, 0.0

    def truncated_expectation(weight) -> float:
        value, _ = integrate(
            lambda u: weight(u) * pdf_link_distance(frame, u), u1, w_p, spec
        )
        return value / tail

    if u1 <= w_m:
        # Inner-piece density is 2u/r_a^2, so the u^-alpha weight integrates
        # in closed form; only the lens piece beyond w_m needs quadrature.
        closed = (
            2.0
            * (w_m ** (2.0 - alpha) - u1 ** (2.0 - alpha))
            / ((2.0 - alpha) * (d * d - u1 * u1))
        )
        lens, _ = integrate(
            lambda u: u ** (-alpha) * pdf_link_distance(frame, u), w_m, w_p, spec
        )
        mean = closed + lens / tail
    else:
        mean = truncated_expectation(lambda u: u ** (-alpha))

    second = truncated_expectation(lambda u: u ** (-2.0 * alpha))
    variance = max(0.0, second - mean * mean)

    # |U^-alpha - mean|^3 has a C2 kink where the power crosses the mean.
    cross = mean ** (-1.0 / alpha)
    rho_spec = spec.with_breakpoints(cross) if u1 < cross < w_p else spec
    rho_val, _ = integrate(
        lambda u: abs(u ** (-alpha) - mean) ** 3 * pdf_link_distance(frame, u),
        u1,
        w_p,
        rho_spec,
    )
    return mean, variance, max(0.0, rho_val / tail)


def _moments(frame, alpha, u1, spec: QuadratureSpec):
    return _per_term_moments(
        frame, alpha, (spec.abs_tol, spec.rel_tol, spec.max_subdivisions), u1
    )


def _require_residual(n_nodes: int, frame: GeometryFrame, r: float, u1: float):
    if n_nodes < 3:
        raise ValueError(
            f"n_nodes={n_nodes!r} leaves no residual interferers; use the exact N=2 path"
        )
    if not (frame.altitude <= r <= u1 <= frame.w_p):
        raise ValueError(f"need altitude <= r <= u1 <= w_p, got r={r!r}, u1={u1!r}")


def residual_mean(
    frame: GeometryFrame,
    n_nodes: int,
    alpha: float,
    r: float,
    u1: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ResidualMoments:
    """Conditional residual-interference moments given (r, u1)."""
    _require_residual(n_nodes, frame, r, u1)
    mean, variance, rho = _moments(frame, alpha, u1, spec)
    return ResidualMoments(
        mean_per_term=mean,
        mean_total=(n_nodes - 2) * mean,
        variance_total=(n_nodes - 2) * variance,
        third_abs_moment_per_term=rho,
    )


def residual_variance(
    frame: GeometryFrame,
    n_nodes: int,
    alpha: float,
    r: float,
    u1: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Variance of the residual interference sum given (r, u1)."""
    _require_residual(n_nodes, frame, r, u1)
    _, variance, _ = _moments(frame, alpha, u1, spec)
    return (n_nodes - 2) * variance


def residual_third_abs_moment(
    frame: GeometryFrame,
    n_nodes: int,
    alpha: float,
    r: float,
    u1: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Per-term third absolute central moment of a residual interference term."""
    _require_residual(n_nodes, frame, r, u1)
    _, _, rho = _moments(frame, alpha, u1, spec)
    return rho


def _dominant_factor(frame: GeometryFrame, n_nodes: int, u1: float) -> float:
    """Joint-density factor carried by the dominant coordinate."""
    tail = 1.0 - cdf_link_distance(frame, u1)
    return (
        n_nodes
        * (n_nodes - 1)
        * pdf_link_distance(frame, u1)
        * tail ** (n_nodes - 2)
    )


def coverage_clt(
    config: NetworkConfig,
    alpha: float,
    x0: float,
    beta: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> CoverageEstimate:
    """No-fading coverage with the residual interference taken Gaussian.

    Outer quadrature runs over the dominant distance u1 so the conditional
    moments are computed once per outer node; the serving coordinate is
    integrated inside (in closed form when the integrand does not involve r).
    """
    if not (beta > 0.0):
        raise ValueError(f"threshold beta must be positive, got {beta!r}")
    if not (alpha > 2.0):
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha!r}")
    n = config.n_nodes
    if n == 1:
        return CoverageEstimate(value=1.0, ci_halfwidth=0.0, trials_or_tol=0.0)
    frame = make_frame(config, x0)
    h, w_m, w_p = frame.altitude, frame.w_m, frame.w_p
    inv_beta = 1.0 / beta

    if n == 2:
        # No residual sum: coverage given (r, u1) is the hard indicator
        # u1 > beta^(1/alpha) r, and the inner r-integral of the link density
        # is just its CDF up to the indicator boundary.
        ratio = beta ** (1.0 / alpha)

        def outer_two(u1: float) -> float:
            hi = min(u1, u1 / ratio)
            return _dominant_factor(frame, 2, u1) * cdf_link_distance(frame, hi)

        pts = [w_m, h * ratio, w_m * ratio]
        ospec = spec.with_breakpoints(*[p for p in pts if h < p < w_p])
        value, err = integrate(outer_two, h, w_p, ospec)
        return CoverageEstimate(
            value=min(1.0, max(0.0, value)), ci_halfwidth=0.0, trials_or_tol=err
        )

    inner_spec = spec.with_breakpoints(w_m)

    def outer(u1: float) -> float:
        mean, variance, _ = _moments(frame, alpha, u1, spec)
        mean_total = (n - 2) * mean
        sigma_total = math.sqrt((n - 2) * variance)
        u1_power = u1 ** (-alpha)

        if sigma_total > 0.0:

            def inner(r: float) -> float:
                gap = inv_beta * r ** (-alpha) - u1_power - mean_total
                return gaussian_cdf(gap / sigma_total) * pdf_link_distance(frame, r)

            inner_value, _ = integrate(inner, h, u1, inner_spec)
        else:
            # Degenerate residual distribution: hard threshold on the gap,
            # covered iff r^-alpha exceeds beta times the total interference.
            total = u1_power + mean_total
            r_star = (beta * total) ** (-1.0 / alpha) if total > 0.0 else u1
            inner_value = cdf_link_distance(frame, min(u1, r_star))
        return _dominant_factor(frame, n, u1) * inner_value

    value, err = integrate(outer, h, w_p, inner_spec)
    return CoverageEstimate(
        value=min(1.0, max(0.0, value)), ci_halfwidth=0.0, trials_or_tol=err
    )


def bet_band_halfwidth(
    config: NetworkConfig,
    alpha: float,
    x0: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Berry-Esseen correction integral C E[rho/sigma^3] / sqrt(N-2).

    This is the halfwidth of the coverage bounds band before clamping; it
    does not depend on the threshold.
    """
    n = config.n_nodes
    if n < 3:
        raise ValueError(f"n_nodes={n!r} has no residual sum to bound")
    frame = make_frame(config, x0)
    h, w_m, w_p = frame.altitude, frame.w_m, frame.w_p

    def outer(u1: float) -> float:
        _, variance, rho = _moments(frame, alpha, u1, spec)
        if variance <= 0.0:
            return 0.0
        ratio = rho / variance**1.5
        return _dominant_factor(frame, n, u1) * cdf_link_distance(frame, u1) * ratio

    value, _ = integrate(outer, h, w_p, spec.with_breakpoints(w_m))
    return BERRY_ESSEEN_CONSTANT * value / math.sqrt(n - 2)


def coverage_bounds(
    config: NetworkConfig,
    alpha: float,
    x0: float,
    beta: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> tuple[float, float]:
    """Hard lower/upper coverage bounds from the Berry-Esseen theorem.

    The Gaussian value plus/minus the correction integral, clamped to [0, 1].
    The sigma in the correction is the per-term standard deviation, which is
    what makes the band width shrink like (N-2)^(-1/2).
    """
    n = config.n_nodes
    if n < 3:
        raise ValueError(f"n_nodes={n!r} has no residual sum to bound")
    center = coverage_clt(config, alpha, x0, beta, spec).value
    halfwidth = bet_band_halfwidth(config, alpha, x0, spec)
    return max(0.0, center - halfwidth), min(1.0, center + halfwidth)
