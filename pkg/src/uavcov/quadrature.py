"""Deterministic adaptive quadrature with mandatory interior breakpoints.

Thin policy layer over QUADPACK (scipy.integrate.quad): open Gauss-Kronrod
rules that never sample interval endpoints, pre-splitting at caller-supplied
breakpoints (the distance-law piece boundary w_m chief among them, where the
integrands have one-sided square-root behaviour), and loud failure instead of
a silently inaccurate value when the subdivision budget is exhausted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.integrate import quad as _quadpack

from .geometry import GeometryFrame


class QuadratureError(RuntimeError):
    """Raised when an integral fails to meet tolerance within budget."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for one integration pass."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_subdivisions: int = 200
    mandatory_breakpoints: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        # abs_tol = 0 is allowed and means pure relative control; integrands
        # at path-loss scale (~1e-10 in metre units) would otherwise be
        # accepted untested against any absolute tolerance near 1e-9.
        if self.abs_tol < 0.0 or not (self.rel_tol > 0.0):
            raise ValueError("need abs_tol >= 0 and rel_tol > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        pts = tuple(sorted(set(float(p) for p in self.mandatory_breakpoints)))
        object.__setattr__(self, "mandatory_breakpoints", pts)

    def with_breakpoints(self, *points: float) -> "QuadratureSpec":
        return QuadratureSpec(
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            max_subdivisions=self.max_subdivisions,
            mandatory_breakpoints=self.mandatory_breakpoints + tuple(points),
        )

    def pure_relative(self) -> "QuadratureSpec":
        """Copy with the absolute tolerance dropped, for small-scale integrals."""
        return QuadratureSpec(
            abs_tol=0.0,
            rel_tol=self.rel_tol,
            max_subdivisions=self.max_subdivisions,
            mandatory_breakpoints=self.mandatory_breakpoints,
        )


DEFAULT_SPEC = QuadratureSpec()


def integrate(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate ``f`` over [a, b]; returns (value, error_estimate).

    The interval is pre-split at every mandatory breakpoint that falls
    strictly inside (a, b).  Raises QuadratureError when the estimate does
    not meet tolerance within the subdivision budget.
    """
    if not (a <= b):
        raise ValueError(f"need a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return 0.0, 0.0
    inside = [p for p in spec.mandatory_breakpoints if a < p < b]
    out = _quadpack(
        f,
        a,
        b,
        points=inside or None,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        # QUADPACK flagged trouble; accept only if the reported error still
        # meets the requested tolerance, otherwise refuse to return a value.
        if not (
            math.isfinite(value)
            and abserr <= max(spec.abs_tol, spec.rel_tol * abs(value))
        ):
            raise QuadratureError(
                f"integral over [{a!r}, {b!r}] did not converge within "
                f"{spec.max_subdivisions} subdivisions "
                f"(estimate {value!r}, error {abserr!r}): {out[3].splitlines()[0]}"
            )
    return value, abserr


def integrate_2d_wedge(f, frame: GeometryFrame, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate ``f(r, u1)`` over the ordered wedge h <= r <= u1 <= w_p.

    Iterated one-dimensional passes: outer over the dominant coordinate u1,
    inner over the serving coordinate r in [h, u1].  The outer loop runs over
    u1 so integrands whose expensive factors depend only on u1 pay for them
    once per outer node; both orders describe the same wedge integral.  The
    distance-law boundary w_m is always a breakpoint for both coordinates.
    """
    h, w_m, w_p = frame.altitude, frame.w_m, frame.w_p
    inner_spec = spec.with_breakpoints(w_m)

    def outer_integrand(u1: float) -> float:
        try:
            value, _ = integrate(lambda r: f(r, u1), h, u1, inner_spec)
        except QuadratureError as exc:
            raise QuadratureError(
                f"inner pass failed at outer coordinate u1={u1!r}: {exc}"
            ) from exc
        return value

    return integrate(outer_integrand, h, w_p, inner_spec)
