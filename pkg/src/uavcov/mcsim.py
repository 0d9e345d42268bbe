"""Monte-Carlo oracle: network sampling, fading, blockage, conditioned stats.

Every analytic engine in this package is validated against this simulator.
It deliberately shares no distribution formulas with the geometry module:
node positions are drawn directly (radius r_a*sqrt(U), uniform angle), link
distances come from coordinates, and coverage is counted from raw SIR.

Reproducibility: trials are split into fixed-size batches; batch k draws
from its own counter-based Philox stream keyed by seed XOR the batch's first
trial index, and results reduce in batch order.  Identical (seed, trials,
batch_size, parameters) give bit-identical estimates no matter how many
workers run (cap with the COVERAGE_THREADS environment variable).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .approx import coverage_clt
from .core import ChannelModel, CoverageEstimate
from .geometry import NetworkConfig

# Slab-method tolerance for segment-box intersection, in metres.
BLOCKAGE_GEOM_TOL = 1e-9

# Conditioning bins accepting fewer than this fraction of trials are refused.
MIN_ACCEPTANCE_RATE = 1e-4


@dataclass(frozen=True)
class MonteCarloConfig:
    """Trial count, stream seed, and per-batch granularity."""

    trials: int
    seed: int
    batch_size: int = 4096

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size!r}")


@dataclass(frozen=True)
class BlockageScene:
    """Axis-aligned buildings scattered uniformly over a ground disk.

    eta scales the power of links whose line of sight crosses a building
    (eta = 0 removes them entirely).  Building centers are drawn uniformly
    over the disk of region_radius around the origin each trial; orientation
    is axis-aligned, and any box landing on top of the receiver is redrawn.
    """

    n_buildings: int
    building_footprint: tuple[float, float]
    building_height: float
    region_radius: float
    eta: float

    def __post_init__(self):
        if self.n_buildings < 0:
            raise ValueError("n_buildings must be >= 0")
        wx, wy = self.building_footprint
        if not (wx > 0.0 and wy > 0.0 and self.building_height > 0.0):
            raise ValueError("building dimensions must be positive")
        if not (self.region_radius > 0.0):
            raise ValueError("region_radius must be positive")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")


def _batch_rng(seed: int, start: int) -> np.random.Generator:
    """Stream for the batch whose first trial index is ``start``."""
    return np.random.Generator(np.random.Philox(key=seed ^ start))


def _batches(mc: MonteCarloConfig):
    for start in range(0, mc.trials, mc.batch_size):
        yield start, min(mc.batch_size, mc.trials - start)


def _worker_count() -> int:
    raw = os.environ.get("COVERAGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_batches(fn, mc: MonteCarloConfig) -> list:
    """Run fn(start, count) over all batches, results in batch order."""
    jobs = list(_batches(mc))
    workers = _worker_count()
    if workers == 1 or len(jobs) == 1:
        return [fn(start, count) for start, count in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def sample_network(rng: np.random.Generator, config: NetworkConfig) -> np.ndarray:
    """One network draw: (n_nodes, 3) positions uniform on the elevated disk."""
    z = config.disk_radius * np.sqrt(rng.random(config.n_nodes))
    phi = rng.random(config.n_nodes) * 2.0 * np.pi
    return np.column_stack(
        (z * np.cos(phi), z * np.sin(phi), np.full(config.n_nodes, config.altitude))
    )


def sample_gamma_fading(rng: np.random.Generator, m: float, size=None):
    """Unit-mean gamma power gain of shape m; the inf sentinel means no fading."""
    if math.isinf(m):
        return 1.0 if size is None else np.ones(size)
    if not (m > 0.0):
        raise ValueError(f"fading shape must be positive, got {m!r}")
    return rng.gamma(m, 1.0 / m, size=size)


def _batch_link_distances(
    rng: np.random.Generator, config: NetworkConfig, x0: float, count: int
) -> np.ndarray:
    """(count, n_nodes) link distances from receiver (x0, 0, 0) to the nodes."""
    n = config.n_nodes
    z = config.disk_radius * np.sqrt(rng.random((count, n)))
    phi = rng.random((count, n)) * 2.0 * np.pi
    s2 = x0 * x0 + z * z - 2.0 * x0 * z * np.cos(phi)
    return np.sqrt(s2 + config.altitude * config.altitude)


def _batch_sir(
    config: NetworkConfig,
    model: ChannelModel,
    x0: float,
    seed: int,
    start: int,
    count: int,
) -> np.ndarray:
    """SIR samples for one batch (infinite where the interference is empty)."""
    rng = _batch_rng(seed, start)
    w = _batch_link_distances(rng, config, x0, count)
    serving_idx = np.argmin(w, axis=1)
    rows = np.arange(count)
    gains = sample_gamma_fading(rng, model.m_interferer, size=w.shape)
    serving_gain = sample_gamma_fading(rng, model.m_serving, size=count)
    power = gains * w ** (-model.alpha)
    signal = serving_gain * w[rows, serving_idx] ** (-model.alpha)
    interference = power.sum(axis=1) - power[rows, serving_idx]
    with np.errstate(divide="ignore"):
        return np.where(interference > 0.0, signal / interference, np.inf)


def simulate_coverage(
    config: NetworkConfig,
    model: ChannelModel,
    x0: float,
    beta: float,
    mc: MonteCarloConfig,
) -> CoverageEstimate:
    """Fraction of trials with SIR above beta, nearest-node association."""
    if not (beta > 0.0):
        raise ValueError(f"threshold beta must be positive, got {beta!r}")
    counts = _map_batches(
        lambda start, count: int(
            np.count_nonzero(_batch_sir(config, model, x0, mc.seed, start, count) > beta)
        ),
        mc,
    )
    p = sum(counts) / mc.trials
    ci = 1.96 * math.sqrt(p * (1.0 - p) / mc.trials)
    return CoverageEstimate(value=p, ci_halfwidth=ci, trials_or_tol=float(mc.trials))


def sample_sir_db(
    config: NetworkConfig,
    model: ChannelModel,
    x0: float,
    mc: MonteCarloConfig,
) -> np.ndarray:
    """All SIR samples in dB, the same trials simulate_coverage counts."""
    parts = _map_batches(
        lambda start, count: _batch_sir(config, model, x0, mc.seed, start, count), mc
    )
    sir = np.concatenate(parts)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(sir)


def _segment_blocked(
    x0: float,
    scene: BlockageScene,
    centers: np.ndarray,
    nodes_xy: np.ndarray,
    altitude: float,
) -> np.ndarray:
    """(trials, n_nodes) mask: receiver-node segment crosses some building.

    Slab intersection of the segment from (x0, 0, 0) to each node with every
    axis-aligned box [cx +- wx/2] x [cy +- wy/2] x [0, building_height].
    """
    tol = BLOCKAGE_GEOM_TOL
    half = (scene.building_footprint[0] / 2.0, scene.building_footprint[1] / 2.0)
    trials, n_nodes = nodes_xy.shape[0], nodes_xy.shape[1]
    n_boxes = centers.shape[1]
    p0 = (x0, 0.0, 0.0)
    direction = (
        nodes_xy[:, :, 0] - x0,
        nodes_xy[:, :, 1],
        np.full((trials, n_nodes), altitude),
    )
    t_enter = np.full((trials, n_nodes, n_boxes), -np.inf)
    t_exit = np.full((trials, n_nodes, n_boxes), np.inf)
    for axis in range(3):
        if axis < 2:
            lo = (centers[:, :, axis] - half[axis])[:, None, :]
            hi = (centers[:, :, axis] + half[axis])[:, None, :]
        else:
            lo = np.float64(0.0)
            hi = np.float64(scene.building_height)
        da = direction[axis][:, :, None]
        pa = p0[axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - pa) / da
            t2 = (hi - pa) / da
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = np.abs(da) <= tol
        if np.any(parallel):
            inside = (pa >= lo - tol) & (pa <= hi + tol)
            near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
            far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
        t_enter = np.maximum(t_enter, near)
        t_exit = np.minimum(t_exit, far)
    hit = (t_enter <= t_exit + tol) & (t_exit >= -tol) & (t_enter <= 1.0 + tol)
    return hit.any(axis=2)


def _sample_buildings(
    rng: np.random.Generator, scene: BlockageScene, x0: float, trials: int
) -> np.ndarray:
    """(trials, n_buildings, 2) centers; boxes over the receiver are redrawn."""
    wx, wy = scene.building_footprint

    def draw(size):
        radius = scene.region_radius * np.sqrt(rng.random(size))
        angle = rng.random(size) * 2.0 * np.pi
        return np.stack((radius * np.cos(angle), radius * np.sin(angle)), axis=-1)

    centers = draw((trials, scene.n_buildings))
    while True:
        over = (np.abs(centers[:, :, 0] - x0) <= wx / 2.0) & (
            np.abs(centers[:, :, 1]) <= wy / 2.0
        )
        n_over = int(over.sum())
        if n_over == 0:
            return centers
        centers[over] = draw((n_over,))


def _blockage_batch(
    config: NetworkConfig,
    scene: BlockageScene,
    x0: float,
    beta: float,
    alpha: float,
    seed: int,
    start: int,
    count: int,
) -> tuple[int, int]:
    """(covered_trials, blocked_links) for one no-fading batch."""
    rng = _batch_rng(seed, start)
    n = config.n_nodes
    z = config.disk_radius * np.sqrt(rng.random((count, n)))
    phi = rng.random((count, n)) * 2.0 * np.pi
    nodes_xy = np.stack((z * np.cos(phi), z * np.sin(phi)), axis=-1)
    w = np.sqrt(
        (nodes_xy[:, :, 0] - x0) ** 2 + nodes_xy[:, :, 1] ** 2 + config.altitude**2
    )
    if scene.n_buildings == 0:
        blocked = np.zeros((count, n), dtype=bool)
    else:
        centers = _sample_buildings(rng, scene, x0, count)
        blocked = _segment_blocked(x0, scene, centers, nodes_xy, config.altitude)
    rows = np.arange(count)
    if scene.eta == 0.0:
        # Hidden nodes vanish; serve from the nearest visible one.
        w_visible = np.where(blocked, np.inf, w)
        serving_idx = np.argmin(w_visible, axis=1)
        serving_w = w_visible[rows, serving_idx]
        any_visible = np.isfinite(serving_w)
        with np.errstate(divide="ignore"):
            power = np.where(blocked, 0.0, w ** (-alpha))
        signal = np.where(any_visible, serving_w, 1.0) ** (-alpha)
        interference = power.sum(axis=1) - np.where(any_visible, signal, 0.0)
        covered = any_visible & (signal > beta * interference)
    else:
        # Nearest-distance association; blocked links only lose power.
        scale = np.where(blocked, scene.eta, 1.0)
        power = scale * w ** (-alpha)
        serving_idx = np.argmin(w, axis=1)
        signal = power[rows, serving_idx]
        interference = power.sum(axis=1) - signal
        covered = signal > beta * interference
    return int(np.count_nonzero(covered)), int(np.count_nonzero(blocked))


def simulate_coverage_blockage_geometric(
    config: NetworkConfig,
    scene: BlockageScene,
    x0: float,
    beta: float,
    mc: MonteCarloConfig,
    alpha: float,
) -> CoverageEstimate:
    """No-fading coverage with geometric line-of-sight blockage.

    eta = 0 serves the nearest visible node (trials with none are lost);
    eta > 0 keeps nearest-distance association with the serving power
    attenuated when its line of sight is blocked.
    """
    if not (beta > 0.0):
        raise ValueError(f"threshold beta must be positive, got {beta!r}")
    if not (alpha > 2.0):
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha!r}")
    results = _map_batches(
        lambda start, count: _blockage_batch(
            config, scene, x0, beta, alpha, mc.seed, start, count
        ),
        mc,
    )
    covered = sum(r[0] for r in results)
    p = covered / mc.trials
    ci = 1.96 * math.sqrt(p * (1.0 - p) / mc.trials)
    return CoverageEstimate(value=p, ci_halfwidth=ci, trials_or_tol=float(mc.trials))


def estimate_blockage_probability(
    config: NetworkConfig,
    scene: BlockageScene,
    x0: float,
    mc: MonteCarloConfig,
) -> float:
    """Fraction of receiver-node links blocked, over the same scene draws
    the geometric simulator would see."""
    # Blocked counts do not depend on the threshold or exponent arguments.
    results = _map_batches(
        lambda start, count: _blockage_batch(
            config, scene, x0, 1.0, 3.0, mc.seed, start, count
        ),
        mc,
    )
    blocked = sum(r[1] for r in results)
    return blocked / (mc.trials * config.n_nodes)


def coverage_blockage_independent(
    config: NetworkConfig,
    alpha: float,
    x0: float,
    beta: float,
    p_block: float,
) -> CoverageEstimate:
    """Coverage when each node is hidden independently with probability p_block.

    The visible count is binomial, and each visible-count slice is served by
    the Gaussian no-fading engine (exact for 0, 1, and 2 visible nodes).
    """
    if not (0.0 <= p_block <= 1.0):
        raise ValueError(f"p_block must lie in [0, 1], got {p_block!r}")
    n = config.n_nodes
    p_vis = 1.0 - p_block
    total = 0.0
    err = 0.0
    for n_vis in range(n + 1):
        weight = math.comb(n, n_vis) * p_vis**n_vis * p_block ** (n - n_vis)
        if weight == 0.0:
            continue
        if n_vis == 0:
            continue  # nothing visible: contributes zero coverage
        if n_vis == 1:
            total += weight
            continue
        sliced = NetworkConfig(
            n_nodes=n_vis, disk_radius=config.disk_radius, altitude=config.altitude
        )
        estimate = coverage_clt(sliced, alpha, x0, beta)
        total += weight * estimate.value
        err += weight * estimate.trials_or_tol
    return CoverageEstimate(
        value=min(1.0, max(0.0, total)), ci_halfwidth=0.0, trials_or_tol=err
    )


@dataclass(frozen=True)
class ConditionalStats:
    """Rejection-conditioned samples and their summary moments.

    Arrays are ordered by batch then trial, so results are reproducible.
    residual holds the residual interferer distances per accepted trial;
    interference is the total faded interference sum (all non-serving
    nodes).  Summary moments describe the no-fading residual interference:
    mean and variance of the per-trial sum, plus the pooled per-term third
    absolute central moment, each with a standard error.
    """

    accepted: int
    attempts: int
    acceptance_rate: float
    serving: np.ndarray
    dominant: np.ndarray
    residual: np.ndarray
    interference: np.ndarray
    alpha: float
    residual_sum_mean: float
    residual_sum_mean_se: float
    residual_sum_variance: float
    residual_sum_variance_se: float
    third_abs_per_term: float
    third_abs_per_term_se: float


def conditional_statistics(
    config: NetworkConfig,
    model: ChannelModel,
    x0: float,
    mc: MonteCarloConfig,
    r_bin: tuple[float, float],
    u1_bin: tuple[float, float],
) -> ConditionalStats:
    """Sample network draws conditioned on serving/dominant distance bins.

    mc.trials is the number of accepted (conditioned) trials collected.
    Raises if the running acceptance rate drops below 1e-4.
    """
    h = config.altitude
    w_p = math.hypot(config.disk_radius + x0, h)
    for name, (lo, hi) in (("r_bin", r_bin), ("u1_bin", u1_bin)):
        if not (h - 1e-9 <= lo < hi <= w_p + 1e-9):
            raise ValueError(f"{name}={lo, hi!r} is not a subinterval of [{h}, {w_p}]")
    if config.n_nodes < 3:
        raise ValueError("need n_nodes >= 3 for residual interferer statistics")
    target = mc.trials
    serving_parts, dominant_parts, residual_parts, interference_parts = [], [], [], []
    accepted = 0
    attempts = 0
    start = 0
    while accepted < target:
        count = mc.batch_size
        rng = _batch_rng(mc.seed, start)
        w = _batch_link_distances(rng, config, x0, count)
        gains = sample_gamma_fading(rng, model.m_interferer, size=w.shape)
        w.sort(axis=1)  # gains are i.i.d., so sorting distances first is harmless
        keep = (
            (w[:, 0] >= r_bin[0])
            & (w[:, 0] < r_bin[1])
            & (w[:, 1] >= u1_bin[0])
            & (w[:, 1] < u1_bin[1])
        )
        interference = (gains[:, 1:] * w[:, 1:] ** (-model.alpha)).sum(axis=1)
        serving_parts.append(w[keep, 0])
        dominant_parts.append(w[keep, 1])
        residual_parts.append(w[keep, 2:])
        interference_parts.append(interference[keep])
        accepted += int(np.count_nonzero(keep))
        attempts += count
        start += count
        if attempts >= 20 * mc.batch_size and accepted < attempts * MIN_ACCEPTANCE_RATE:
            raise RuntimeError(
                f"conditioning bins too narrow: acceptance rate "
                f"{accepted / attempts:.2e} < {MIN_ACCEPTANCE_RATE:.0e} "
                f"after {attempts} trials"
            )
    serving = np.concatenate(serving_parts)[:target]
    dominant = np.concatenate(dominant_parts)[:target]
    residual = np.concatenate(residual_parts)[:target]
    interference = np.concatenate(interference_parts)[:target]
    n = target
    v = residual ** (-model.alpha)
    sums = v.sum(axis=1)
    mean = float(sums.mean())
    mean_se = float(sums.std(ddof=1) / math.sqrt(n))
    var = float(sums.var(ddof=1))
    centered = sums - mean
    fourth = float((centered**4).mean())
    var_se = math.sqrt(max(0.0, fourth - var * var) / n)
    abs3 = np.abs(v - v.mean()) ** 3
    third = float(abs3.mean())
    third_se = float(abs3.std(ddof=1) / math.sqrt(abs3.size))
    return ConditionalStats(
        accepted=accepted,
        attempts=attempts,
        acceptance_rate=accepted / attempts,
        serving=serving,
        dominant=dominant,
        residual=residual,
        interference=interference,
        alpha=model.alpha,
        residual_sum_mean=mean,
        residual_sum_mean_se=mean_se,
        residual_sum_variance=var,
        residual_sum_variance_se=var_se,
        third_abs_per_term=third,
        third_abs_per_term_se=third_se,
    )
