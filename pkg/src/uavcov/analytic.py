"""Exact coverage under gamma fading via the interference Laplace transform.

Conditioned on the serving distance r, the interference from the remaining
N-1 nodes has Laplace transform L(s) = g(s)^(N-1), with g the transform of a
single interferer's faded power averaged over its distance law truncated to
[r, w_p].  An integer serving shape m0 turns the coverage probability into a
finite sum of the first m0 derivatives of L at s = m0 beta r^alpha, and the
serving-distance density then integrates r out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ChannelModel, CoverageEstimate
from .geometry import (
    GeometryFrame,
    NetworkConfig,
    cdf_link_distance,
    make_frame,
    pdf_link_distance,
    pdf_serving_distance,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate

# The finite coverage sum alternates in sign; beyond ten terms the
# cancellation eats double precision, so larger serving shapes are refused
# (the Gaussian engines cover that regime).
MAX_DERIVATIVE_ORDER = 9


@dataclass(frozen=True)
class LaplaceDerivatives:
    """Derivatives of the conditional interference Laplace transform.

    derivs[k] is the k-th derivative of L(s) = g(s)^(N-1) at the stored s;
    signs alternate starting positive (L is completely monotone).
    """

    s: float
    r: float
    derivs: tuple[float, ...]


def single_node_factor_derivative(k: int, s: float, u: float, model: ChannelModel) -> float:
    """k-th s-derivative of one interferer's gamma-fading Laplace factor.

    The factor is (1 + s u^-alpha / m)^-m, the transform of a unit-mean
    gamma gain of shape m scaled by the path loss u^-alpha.
    """
    if k < 0:
        raise ValueError(f"derivative order must be non-negative, got {k!r}")
    m = model.m_interferer
    if not math.isfinite(m):
        raise ValueError("interferer shape is infinite; use the no-fading engines")
    if not (u > 0.0 and s >= 0.0):
        raise ValueError(f"need u > 0 and s >= 0, got u={u!r}, s={s!r}")
    pl = u ** (-model.alpha)
    base = 1.0 + s * pl / m
    rising = 1.0
    for i in range(k):
        rising *= m + i
    sign = -1.0 if k % 2 else 1.0
    return sign * rising * m ** (-k) * pl**k * base ** (-m - k)


def _single_interferer_transform_derivatives(
    frame: GeometryFrame,
    model: ChannelModel,
    s: float,
    r: float,
    max_order: int,
    spec: QuadratureSpec,
) -> list[float]:
    """g and its first max_order s-derivatives, g being one interferer's
    Laplace factor averaged over its distance law truncated to [r, w_p]."""
    tail = 1.0 - cdf_link_distance(frame, r)
    if tail <= 0.0:
        # Degenerate conditioning at the support edge: all remaining mass at r.
        return [single_node_factor_derivative(j, s, r, model) for j in range(max_order + 1)]
    # Higher-order integrands scale like u^(-j*alpha), far below any useful
    # absolute tolerance in metre units; control them relatively.
    uspec = spec.with_breakpoints(frame.w_m).pure_relative()
    out = []
    for j in range(max_order + 1):
        def integrand(u, _j=j):
            return single_node_factor_derivative(_j, s, u, model) * pdf_link_distance(frame, u)

        value, _ = integrate(integrand, r, frame.w_p, uspec)
        out.append(value / tail)
    return out


def laplace_interference(
    frame: GeometryFrame,
    n_nodes: int,
    model: ChannelModel,
    s: float,
    r: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Laplace transform of the total interference given serving distance r."""
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes!r}")
    if n_nodes == 1:
        return 1.0
    if not (frame.altitude <= r <= frame.w_p):
        raise ValueError(f"serving distance r={r!r} outside [{frame.altitude!r}, {frame.w_p!r}]")
    g = _single_interferer_transform_derivatives(frame, model, s, r, 0, spec)[0]
    return g ** (n_nodes - 1)


def laplace_derivatives(
    frame: GeometryFrame,
    n_nodes: int,
    model: ChannelModel,
    s: float,
    r: float,
    max_order: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> LaplaceDerivatives:
    """Derivatives of the conditional interference Laplace transform.

    One quadrature pass per order feeds the power-composition recurrence for
    L = g^(N-1): with a_j = g^(j)/j! and b_0 = a_0^(N-1),

        b_k = (1 / (k a_0)) * sum_{j=1..k} (j n_nodes - k) a_j b_{k-j}

    and L^(k) = k! b_k.
    """
    if max_order < 0 or max_order > MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"max_order must be in [0, {MAX_DERIVATIVE_ORDER}], got {max_order!r}"
        )
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes!r}")
    if n_nodes == 1:
        return LaplaceDerivatives(s=s, r=r, derivs=(1.0,) + (0.0,) * max_order)
    if not (frame.altitude <= r <= frame.w_p):
        raise ValueError(f"serving distance r={r!r} outside [{frame.altitude!r}, {frame.w_p!r}]")
    g_derivs = _single_interferer_transform_derivatives(frame, model, s, r, max_order, spec)
    a = [gj / math.factorial(j) for j, gj in enumerate(g_derivs)]
    b = [a[0] ** (n_nodes - 1)]
    for k in range(1, max_order + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc += (j * n_nodes - k) * a[j] * b[k - j]
        b.append(acc / (k * a[0]))
    derivs = tuple(math.factorial(k) * bk for k, bk in enumerate(b))
    return LaplaceDerivatives(s=s, r=r, derivs=derivs)


def conditional_coverage_nakagami(
    frame: GeometryFrame,
    n_nodes: int,
    model: ChannelModel,
    beta: float,
    r: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """P(SIR > beta) given the serving distance r, integer serving shape.

    Evaluates sum_{k=0..m0-1} (-m0 beta r^alpha)^k / k! * L^(k)(m0 beta r^alpha).
    """
    if not (beta > 0.0):
        raise ValueError(f"threshold beta must be positive, got {beta!r}")
    m0f = model.m_serving
    if not math.isfinite(m0f):
        raise ValueError("serving shape is infinite; use the no-fading engines")
    m0 = int(m0f)
    if m0 - 1 > MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"serving shape {m0} needs derivative order {m0 - 1} > {MAX_DERIVATIVE_ORDER}; "
            "use the Gaussian engines for large shapes"
        )
    if n_nodes == 1:
        return 1.0
    s = m0 * beta * r**model.alpha
    lap = laplace_derivatives(frame, n_nodes, model, s, r, m0 - 1, spec)
    total = 0.0
    for k, lk in enumerate(lap.derivs):
        total += (-s) ** k / math.factorial(k) * lk
    return min(1.0, max(0.0, total))


def coverage_nakagami(
    config: NetworkConfig,
    model: ChannelModel,
    x0: float,
    beta: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> CoverageEstimate:
    """Coverage probability under gamma fading, serving distance integrated out."""
    if not (beta > 0.0):
        raise ValueError(f"threshold beta must be positive, got {beta!r}")
    if config.n_nodes == 1:
        return CoverageEstimate(value=1.0, ci_halfwidth=0.0, trials_or_tol=0.0)
    frame = make_frame(config, x0)
    rspec = spec.with_breakpoints(frame.w_m)

    def integrand(r):
        return conditional_coverage_nakagami(
            frame, config.n_nodes, model, beta, r, spec
        ) * pdf_serving_distance(frame, config.n_nodes, r)

    value, err = integrate(integrand, frame.altitude, frame.w_p, rspec)
    return CoverageEstimate(
        value=min(1.0, max(0.0, value)), ci_halfwidth=0.0, trials_or_tol=err
    )
