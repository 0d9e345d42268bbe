"""Shared value types for the coverage engines."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelModel:
    """Path-loss exponent and gamma-fading shapes for serving/interfering links.

    Gains are unit-mean gamma with the given shape; a shape of math.inf means
    the no-fading limit (all gains identically one).  The serving shape must
    be a positive integer when finite: the exact engine's finite expansion
    relies on it.
    """

    alpha: float
    m_serving: float
    m_interferer: float

    def __post_init__(self):
        if not (self.alpha > 2.0):
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha!r}")
        if math.isfinite(self.m_serving):
            if self.m_serving < 1 or self.m_serving != int(self.m_serving):
                raise ValueError(
                    f"finite serving shape must be a positive integer, got {self.m_serving!r}"
                )
        if math.isfinite(self.m_interferer) and not (self.m_interferer > 0.0):
            raise ValueError(
                f"interferer shape must be positive, got {self.m_interferer!r}"
            )

    @property
    def is_no_fading(self) -> bool:
        return math.isinf(self.m_serving) and math.isinf(self.m_interferer)

    @classmethod
    def no_fading(cls, alpha: float) -> "ChannelModel":
        return cls(alpha=alpha, m_serving=math.inf, m_interferer=math.inf)

    @classmethod
    def nakagami(cls, alpha: float, m: float) -> "ChannelModel":
        """Same fading shape on every link."""
        return cls(alpha=alpha, m_serving=m, m_interferer=m)


@dataclass(frozen=True)
class CoverageEstimate:
    """A coverage probability with provenance.

    ci_halfwidth is the 95% normal-approximation halfwidth for Monte-Carlo
    estimates and zero for deterministic engines; trials_or_tol records the
    trial count (Monte-Carlo) or the quadrature error estimate (analytic).
    """

    value: float
    ci_halfwidth: float
    trials_or_tol: float

    def __post_init__(self):
        if not (-1e-9 <= self.value <= 1.0 + 1e-9):
            raise ValueError(f"coverage probability out of range: {self.value!r}")
