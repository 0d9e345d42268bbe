"""Distance distributions for a receiver served by aerial transmitters on a disk.

N transmitters sit at independent uniform positions on a horizontal disk of
radius ``disk_radius`` at height ``altitude`` above the ground plane.  The
receiver is on the ground at horizontal offset ``x0`` from the disk centre's
projection.  Everything downstream (exact coverage, Gaussian approximations,
simulation cross-checks) is driven by the distribution of the 3-D link
distances W_i, their minimum (the serving distance R), the second smallest
(the dominant interferer distance U1), and the remaining interferers.

All lengths are in consistent linear units (metres throughout this package).
The link-distance law is piecewise: a quadratic piece while the horizontal
ball of radius sqrt(w^2 - h^2) around the receiver is contained in the disk,
and a lens-overlap piece once that ball spills over the disk edge.  The two
pieces meet at w_m = sqrt((disk_radius - x0)^2 + altitude^2) and the support
ends at w_p = sqrt((disk_radius + x0)^2 + altitude^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Slack accepted on inverse-cosine arguments before declaring a domain error.
# Arguments land on +-1 exactly at the piece boundaries; roundoff can push
# them a few ulp outside.
ACOS_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class NetworkConfig:
    """Static network description: node count, disk radius, altitude."""

    n_nodes: int
    disk_radius: float
    altitude: float

    def __post_init__(self):
        if not isinstance(self.n_nodes, int) or self.n_nodes < 1:
            raise ValueError(f"n_nodes must be a positive integer, got {self.n_nodes!r}")
        if not (self.disk_radius > 0.0):
            raise ValueError(f"disk_radius must be positive, got {self.disk_radius!r}")
        if not (self.altitude >= 0.0):
            raise ValueError(f"altitude must be non-negative, got {self.altitude!r}")


@dataclass(frozen=True)
class GeometryFrame:
    """Receiver-anchored derived lengths, computed once and passed around.

    x0      horizontal receiver offset from the disk centre projection
    d       distance from the disk centre projection to a disk-edge point
            at altitude, sqrt(disk_radius^2 + altitude^2)
    w_m     link distance at which the near disk edge is first reached
    w_p     largest possible link distance (far disk edge)
    s_m     horizontal distance to the near disk edge, disk_radius - x0
    s_p     horizontal distance to the far disk edge, disk_radius + x0
    """

    x0: float
    disk_radius: float
    altitude: float
    d: float
    w_m: float
    w_p: float
    s_m: float
    s_p: float


def make_frame(config: NetworkConfig, x0: float) -> GeometryFrame:
    """Build the derived-length frame for a receiver at offset ``x0``.

    Offsets outside the disk are rejected: the distance law below is only
    valid for receivers under the disk.
    """
    if not (0.0 <= x0 <= config.disk_radius):
        raise ValueError(
            f"receiver offset x0={x0!r} outside [0, disk_radius={config.disk_radius!r}]"
        )
    ra, h = config.disk_radius, config.altitude
    return GeometryFrame(
        x0=float(x0),
        disk_radius=float(ra),
        altitude=float(h),
        d=math.hypot(ra, h),
        w_m=math.hypot(ra - x0, h),
        w_p=math.hypot(ra + x0, h),
        s_m=ra - x0,
        s_p=ra + x0,
    )


def _acos_arg(x: float) -> float:
    """Inverse cosine with boundary clamping; loud failure beyond tolerance."""
    if x > 1.0:
        if x > 1.0 + ACOS_CLAMP_TOL:
            raise ValueError(f"inverse-cosine argument {x!r} beyond clamp tolerance")
        x = 1.0
    elif x < -1.0:
        if x < -1.0 - ACOS_CLAMP_TOL:
            raise ValueError(f"inverse-cosine argument {x!r} beyond clamp tolerance")
        x = -1.0
    return math.acos(x)


def cdf_link_distance(frame: GeometryFrame, w: float) -> float:
    """CDF of the 3-D distance from the receiver to one uniform transmitter."""
    h = frame.altitude
    if w <= h:
        return 0.0
    if w >= frame.w_p:
        return 1.0
    ra2 = frame.disk_radius * frame.disk_radius
    if w <= frame.w_m:
        return (w * w - h * h) / ra2
    # Lens-overlap piece: fraction of the disk inside the horizontal ball of
    # radius s = sqrt(w^2 - h^2) around the receiver.
    x0, d = frame.x0, frame.d
    s2 = w * w - h * h
    s = math.sqrt(s2)
    theta = _acos_arg((w * w + x0 * x0 - d * d) / (2.0 * x0 * s))
    phi = _acos_arg((x0 * x0 + d * d - w * w) / (2.0 * x0 * frame.disk_radius))
    return (s2 / (math.pi * ra2)) * (theta - 0.5 * math.sin(2.0 * theta)) + (
        phi - 0.5 * math.sin(2.0 * phi)
    ) / math.pi


def pdf_link_distance(frame: GeometryFrame, w: float) -> float:
    """Density of the 3-D link distance to one uniform transmitter."""
    h = frame.altitude
    if w < h or w > frame.w_p:
        return 0.0
    ra2 = frame.disk_radius * frame.disk_radius
    if w <= frame.w_m:
        return 2.0 * w / ra2
    x0, d = frame.x0, frame.d
    s = math.sqrt(w * w - h * h)
    theta = _acos_arg((w * w + x0 * x0 - d * d) / (2.0 * x0 * s))
    return 2.0 * w * theta / (math.pi * ra2)


def pdf_serving_distance(frame: GeometryFrame, n_nodes: int, r: float) -> float:
    """Density of the minimum of ``n_nodes`` independent link distances."""
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes!r}")
    if r < frame.altitude or r > frame.w_p:
        return 0.0
    tail = 1.0 - cdf_link_distance(frame, r)
    return n_nodes * tail ** (n_nodes - 1) * pdf_link_distance(frame, r)


def pdf_interferer_given_serving(frame: GeometryFrame, u: float, r: float) -> float:
    """Density of one interferer distance given the serving distance ``r``.

    Interferers are the non-serving nodes; conditioned on the minimum being
    ``r`` each of them is an independent draw of the link distance truncated
    to [r, w_p].
    """
    if not (frame.altitude <= r < frame.w_p):
        raise ValueError(f"serving distance r={r!r} outside [{frame.altitude!r}, w_p)")
    if u < r or u > frame.w_p:
        return 0.0
    tail = 1.0 - cdf_link_distance(frame, r)
    if tail <= 0.0:
        raise ValueError(f"no distance mass beyond r={r!r}")
    return pdf_link_distance(frame, u) / tail


def joint_pdf_serving_dominant(
    frame: GeometryFrame, n_nodes: int, r: float, u1: float
) -> float:
    """Joint density of the two smallest link distances (serving, dominant).

    Each factor is evaluated with the distance-law piece of its own argument.
    """
    if n_nodes < 2:
        raise ValueError(f"n_nodes must be >= 2 for a dominant interferer, got {n_nodes!r}")
    if not (frame.altitude <= r <= u1 <= frame.w_p):
        return 0.0
    tail = 1.0 - cdf_link_distance(frame, u1)
    return (
        n_nodes
        * (n_nodes - 1)
        * pdf_link_distance(frame, r)
        * pdf_link_distance(frame, u1)
        * tail ** (n_nodes - 2)
    )


def pdf_residual_interferer(frame: GeometryFrame, u: float, r: float, u1: float) -> float:
    """Density of one residual interferer distance given serving and dominant.

    Given the two smallest distances (r, u1), each remaining node is an
    independent draw of the link distance truncated to [u1, w_p]; the serving
    distance enters only through the ordering constraint r <= u1.
    """
    if not (frame.altitude <= r <= u1):
        raise ValueError(f"need altitude <= r <= u1, got r={r!r}, u1={u1!r}")
    if u1 >= frame.w_p:
        raise ValueError(f"dominant distance u1={u1!r} leaves no residual range below w_p")
    if u < u1 or u > frame.w_p:
        return 0.0
    tail = 1.0 - cdf_link_distance(frame, u1)
    if tail <= 0.0:
        raise ValueError(f"no distance mass beyond u1={u1!r}")
    return pdf_link_distance(frame, u) / tail


@dataclass(frozen=True)
class DistanceTriple:
    """Sorted decomposition of one network draw: serving, dominant, rest."""

    serving: float
    dominant: float
    residual: tuple[float, ...]

    def __post_init__(self):
        if self.dominant < self.serving:
            raise ValueError("dominant interferer closer than serving node")
        if any(u < self.dominant for u in self.residual):
            raise ValueError("residual interferer closer than dominant")


def distance_triple(frame: GeometryFrame, distances) -> DistanceTriple:
    """Sort raw link distances of one draw into a validated triple."""
    ws = sorted(float(w) for w in distances)
    if len(ws) < 2:
        raise ValueError("need at least two link distances")
    if ws[0] < frame.altitude or ws[-1] > frame.w_p * (1.0 + 1e-12):
        raise ValueError("link distance outside the geometric support")
    return DistanceTriple(serving=ws[0], dominant=ws[1], residual=tuple(ws[2:]))
