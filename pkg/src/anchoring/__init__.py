"""Anchoring-detection trading algorithm: price models, exact steady-state
engine, online strategy, and backtesting harness."""

from anchoring.analytic import (
    AnalyticResult,
    Configuration,
    JointChain,
    analyze,
    build_joint_chain,
    closed_form_binomial_return,
    closed_form_binomial_variance_as_printed,
    expected_return,
    return_variance,
)
from anchoring.price_models import (
    DiscreteDistribution,
    DriftingTwoPointModel,
    PriceSeries,
    TwoPointModel,
    sample_anchored_series,
    sample_drifting_series,
    sample_random_walk,
    two_point_distribution,
)
from anchoring.strategy import Mode, StrategyState, run_policy

__all__ = [
    "AnalyticResult",
    "Configuration",
    "DiscreteDistribution",
    "DriftingTwoPointModel",
    "JointChain",
    "Mode",
    "PriceSeries",
    "StrategyState",
    "TwoPointModel",
    "analyze",
    "build_joint_chain",
    "closed_form_binomial_return",
    "closed_form_binomial_variance_as_printed",
    "expected_return",
    "return_variance",
    "run_policy",
    "sample_anchored_series",
    "sample_drifting_series",
    "sample_random_walk",
    "two_point_distribution",
]
