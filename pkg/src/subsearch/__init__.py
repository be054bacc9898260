"""Numerical toolkit for subsidized-inspection search markets.

Computes the refined step-increasing-step equilibrium of the game where firms
with private match probabilities subsidize a consumer's costly inspection,
simulates descending-subsidy consumer search, produces the full welfare
decomposition, and optimizes a platform's per-unit subsidy (token) price.
"""

from .attention import MarketParams, q_pool, q_sep, reservation_index
from .distributions import Beta, PiecewiseLinearCdf, TypeDistribution, Uniform, from_spec
from .equilibrium import (
    EquilibriumSolution,
    SubsidySchedule,
    boundary_gap,
    check_incentive_compatibility,
    lower_cutoff,
    sigma_sep,
    sis_schedule,
    solve_reasonable_equilibrium,
    upper_cutoff,
)
from .pricing import (
    PlatformSweep,
    build_platform_sweep,
    optimize_price,
    revenue_decomposition,
    subsidy_demand,
)
from .search import (
    SearchOutcome,
    SimulationReport,
    brute_force_consumer_value,
    dsir_order,
    plan_value,
    run_single_market,
    simulate_market,
)
from .welfare import (
    SweepResult,
    WelfareReport,
    comparative_statics_sweep,
    producer_surplus_identity_check,
    transfer_virtual_value_check,
    welfare_report,
)

__version__ = "0.1.0"

__all__ = [
    "MarketParams",
    "TypeDistribution",
    "Uniform",
    "Beta",
    "PiecewiseLinearCdf",
    "from_spec",
    "q_sep",
    "q_pool",
    "reservation_index",
    "lower_cutoff",
    "sigma_sep",
    "boundary_gap",
    "upper_cutoff",
    "solve_reasonable_equilibrium",
    "sis_schedule",
    "check_incentive_compatibility",
    "SubsidySchedule",
    "EquilibriumSolution",
    "SearchOutcome",
    "SimulationReport",
    "dsir_order",
    "plan_value",
    "brute_force_consumer_value",
    "run_single_market",
    "simulate_market",
    "WelfareReport",
    "SweepResult",
    "welfare_report",
    "producer_surplus_identity_check",
    "transfer_virtual_value_check",
    "comparative_statics_sweep",
    "PlatformSweep",
    "subsidy_demand",
    "revenue_decomposition",
    "optimize_price",
    "build_platform_sweep",
    "__version__",
]
