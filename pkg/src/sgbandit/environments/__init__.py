"""Stochastic monotone-submodular reward sources.

An environment exposes ``arm_count``, ``exact``, ``sample(action, rng, size)``
returning rewards in [0, 1], ``expected(action)`` and
``expected_with_error(action) -> (mean, stderr)``.
"""

from .cascade import (
    CascadeEnv,
    cascade_counts,
    estimate_expected_spread,
    influence_reward,
    simulate_cascade,
)
from .checks import SubmodularityReport, check_monotone_submodular
from .coverage import (
    CoverageEnv,
    CoverageInstance,
    coverage_expected,
    coverage_sample,
    coverage_samples,
    load_coverage_instance,
    random_coverage_instance,
    read_coverage_instance,
    save_coverage_instance,
    write_coverage_instance,
)
from .graph import Graph, ParseError, load_edge_list, read_edge_list, write_edge_list

__all__ = [
    "CascadeEnv",
    "CoverageEnv",
    "CoverageInstance",
    "Graph",
    "ParseError",
    "SubmodularityReport",
    "cascade_counts",
    "check_monotone_submodular",
    "coverage_expected",
    "coverage_sample",
    "coverage_samples",
    "estimate_expected_spread",
    "influence_reward",
    "load_coverage_instance",
    "load_edge_list",
    "random_coverage_instance",
    "read_coverage_instance",
    "read_edge_list",
    "save_coverage_instance",
    "simulate_cascade",
    "write_coverage_instance",
    "write_edge_list",
]
