"""Downlink SIR coverage of a ground receiver served by the nearest of N
aerial transmitters placed uniformly on an elevated disk.

Three coverage engines share one geometry core: an exact engine for
integer Nakagami fading shapes built on interference Laplace-transform
derivatives, a Gaussian engine for the no-fading limit with computable
error bands, and a Monte-Carlo simulator used as the cross-validation
oracle (including an urban line-of-sight blockage scenario).  The
``coverage`` command-line tool drives parameter sweeps to CSV and SVG.
"""

from .analytic import (
    LaplaceDerivatives,
    conditional_coverage_nakagami,
    coverage_nakagami,
    laplace_derivatives,
    laplace_interference,
    single_node_factor_derivative,
)
from .approx import (
    ResidualMoments,
    bet_band_halfwidth,
    coverage_bounds,
    coverage_clt,
    residual_mean,
    residual_third_abs_moment,
    residual_variance,
)
from .core import ChannelModel, CoverageEstimate
from .geometry import (
    DistanceTriple,
    GeometryFrame,
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
from .mcsim import (
    BlockageScene,
    ConditionalStats,
    MonteCarloConfig,
    conditional_statistics,
    coverage_blockage_independent,
    estimate_blockage_probability,
    sample_gamma_fading,
    sample_network,
    sample_sir_db,
    simulate_coverage,
    simulate_coverage_blockage_geometric,
)
from .quadrature import DEFAULT_SPEC, QuadratureError, QuadratureSpec, integrate
from .specfn import (
    AsymptoticExpansionResult,
    asymptotic_gamma_ratio,
    erf,
    gaussian_cdf,
    nofading_limit_indicator,
    q_function,
    regularized_upper_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticExpansionResult",
    "BlockageScene",
    "ChannelModel",
    "ConditionalStats",
    "CoverageEstimate",
    "DEFAULT_SPEC",
    "DistanceTriple",
    "GeometryFrame",
    "LaplaceDerivatives",
    "MonteCarloConfig",
    "NetworkConfig",
    "QuadratureError",
    "QuadratureSpec",
    "ResidualMoments",
    "asymptotic_gamma_ratio",
    "bet_band_halfwidth",
    "cdf_link_distance",
    "conditional_coverage_nakagami",
    "conditional_statistics",
    "coverage_blockage_independent",
    "coverage_bounds",
    "coverage_clt",
    "coverage_nakagami",
    "distance_triple",
    "erf",
    "estimate_blockage_probability",
    "gaussian_cdf",
    "integrate",
    "joint_pdf_serving_dominant",
    "laplace_derivatives",
    "laplace_interference",
    "make_frame",
    "nofading_limit_indicator",
    "pdf_interferer_given_serving",
    "pdf_link_distance",
    "pdf_residual_interferer",
    "pdf_serving_distance",
    "q_function",
    "regularized_upper_gamma",
    "sample_gamma_fading",
    "sample_network",
    "sample_sir_db",
    "simulate_coverage",
    "simulate_coverage_blockage_geometric",
    "single_node_factor_derivative",
]
