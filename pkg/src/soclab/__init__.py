"""Stochastic optimal control lab.

Closed-form selling policies for a discounted revenue problem, two
independent out-of-sample evaluators (semi-analytic integration and
discounted Monte Carlo), comparison studies between sample-based SDP and
forecast-based MPC, and a finite dynamic-programming engine for verifying
the forecast/robust equivalence and performance bounds numerically.
"""

from .dist import (
    Distribution,
    Empirical,
    Exponential,
    LogNormal,
    PointMass,
    Triangular,
    dist_from_config,
    dist_to_config,
)
from .rosp import (
    CostModel,
    PolicySpec,
    SampleSet,
    excess_functional,
    min_acceptable_price,
    sell_down,
    target_inventory,
)
from .evaluate import (
    EvalReport,
    OuterStudy,
    check_storage_dominance,
    difference_map,
    discount_sweep,
    expected_performance,
    mc_value,
    semianalytic_profile,
    semianalytic_value,
    simulate_value,
    switch_value,
    value_derivative,
)
from .streams import RandomStream

__version__ = "0.1.0"
