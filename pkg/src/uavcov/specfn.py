"""Special functions for the coverage engines.

Houses the regularized upper incomplete gamma (the gamma-fading CCDF), the
error and Gaussian tail functions, the large-shape Gaussian expansion of the
gamma CCDF, and the hard-threshold indicator that the expansion converges to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Series / continued-fraction convergence threshold and iteration cap.
CONVERGENCE_TOL = 1e-14
MAX_ITERATIONS = 10_000

# Disagreement band around z = 1 treated as a tie by the hard threshold.
TIE_TOL = 1e-12

# Smallest shape for which the two-term Gaussian expansion is offered.
MIN_ASYMPTOTIC_SHAPE = 10.0


def regularized_upper_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).

    Series for the lower function when x < a + 1, Lentz continued fraction
    for the upper function otherwise; both stop at 1e-14 relative increments.
    """
    if not (a > 0.0):
        raise ValueError(f"shape a must be positive, got {a!r}")
    if x < 0.0:
        raise ValueError(f"argument x must be non-negative, got {x!r}")
    if x == 0.0:
        return 1.0
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # Lower series: gamma(a, x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n)).
        term = 1.0 / a
        total = term
        denom = a
        for _ in range(MAX_ITERATIONS):
            denom += 1.0
            term *= x / denom
            total += term
            if abs(term) < abs(total) * CONVERGENCE_TOL:
                lower = total * math.exp(log_prefactor)
                return max(0.0, 1.0 - lower)
        raise RuntimeError(f"incomplete-gamma series failed to converge for a={a}, x={x}")
    # Upper continued fraction (modified Lentz).
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    f = d
    for i in range(1, MAX_ITERATIONS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = tiny
        c = b + an / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < CONVERGENCE_TOL:
            return min(1.0, f * math.exp(log_prefactor))
    raise RuntimeError(
        f"incomplete-gamma continued fraction failed to converge for a={a}, x={x}"
    )


def erf(x: float) -> float:
    """Error function."""
    return math.erf(x)


def q_function(x: float) -> float:
    """Standard Gaussian tail probability Q(x) = P(Z > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_cdf(x: float) -> float:
    """Standard Gaussian CDF, the complement of q_function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class AsymptoticExpansionResult:
    """Two-term large-shape expansion value plus provenance.

    error_bound_hint is a rough magnitude for the first dropped term (one
    power of sqrt(2/m0) below the retained correction), not a strict bound.
    """

    value: float
    order_used: int
    error_bound_hint: float


def asymptotic_gamma_ratio(m0: float, z: float) -> AsymptoticExpansionResult:
    """Large-shape Gaussian expansion of Q(m0, m0*z).

    With y = sqrt(m0/2) (z - 1):

        Q(m0, m0 z) ~= 1/2 - erf(y)/2 + (1/3) sqrt(2/(m0 pi)) (1 + y^2) e^{-y^2}

    keeping the Gaussian-limit term and the first skewness correction.
    """
    if m0 < MIN_ASYMPTOTIC_SHAPE:
        raise ValueError(
            f"shape m0={m0!r} below {MIN_ASYMPTOTIC_SHAPE}: the two-term expansion "
            "is only offered for large shapes; use regularized_upper_gamma instead"
        )
    if z < 0.0:
        raise ValueError(f"threshold ratio z must be non-negative, got {z!r}")
    y = math.sqrt(m0 / 2.0) * (z - 1.0)
    y2 = y * y
    gauss = math.exp(-y2) if y2 < 745.0 else 0.0
    correction = (1.0 / 3.0) * math.sqrt(2.0 / (m0 * math.pi)) * (1.0 + y2) * gauss
    value = 0.5 - 0.5 * math.erf(y) + correction
    hint = correction * math.sqrt(2.0 / m0) + gauss / m0
    return AsymptoticExpansionResult(value=value, order_used=2, error_bound_hint=hint)


def nofading_limit_indicator(z: float) -> float:
    """Hard threshold that Q(m0, m0*z) converges to as m0 grows.

    1 below z = 1, 0 above, one half on the tie (|z - 1| <= 1e-12).
    """
    if z < 0.0:
        raise ValueError(f"threshold ratio z must be non-negative, got {z!r}")
    if abs(z - 1.0) <= TIE_TOL:
        return 0.5
    return 1.0 if z < 1.0 else 0.0
