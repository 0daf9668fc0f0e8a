"""Stochastic-greedy combinatorial bandits with full-bandit feedback."""

from .algorithms import (
    BudgetExceededError,
    HorizonError,
    OfflineResult,
    brute_force_opt,
    offline_greedy,
    offline_stochastic_greedy,
    run_etcg,
    run_random_constant,
    run_sgb,
    run_sgb_anytime,
)
from .schedule import (
    BanditParams,
    HorizonReport,
    PhaseState,
    RunTrace,
    ScheduleError,
    compute_beta,
    compute_epsilon_star,
    compute_m,
    compute_sample_size,
    make_params,
    minimal_horizon,
    sample_candidate_set,
    select_empirical_best,
    validate_horizon,
)

__version__ = "0.1.0"
