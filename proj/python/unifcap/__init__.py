"""Capacity and capacity-achieving input distributions of the additive
uniform noise channel with peak-amplitude and average-cost constraints.

The heavy lifting lives in the compiled extension `_unifcap`; this package
re-exports its public surface.
"""

from ._unifcap import (  # noqa: F401
    BAConfig,
    BAResult,
    ChannelGeometry,
    CombinedMasses,
    CostFunction,
    DiscreteInputDistribution,
    DiscretizedChannel,
    Exponents,
    KKTReport,
    LinearityReport,
    SupportClusters,
    Thresholds,
    __version__,
    ba_fixed_lambda,
    ba_solve,
    back_transform,
    capacity_analytic,
    cbar_star,
    check_piecewise_linear,
    classify,
    combined_masses,
    cost_derivative_check,
    differential_entropy,
    discretize,
    entropy,
    expected_cost,
    exponents,
    extract_support,
    integer_limit_check,
    integer_masses,
    kkt_report,
    lambda_threshold,
    make_geometry,
    marginal_information_density,
    mi_quadrature_oracle,
    mutual_information,
    mutual_information_via_entropy,
    normalization_split,
    output_density,
    solve,
    support_k_distribution,
    sweep_budgets,
    thresholds,
    unconstrained_solution,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
