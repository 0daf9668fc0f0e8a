"""Online explore-then-commit learners and offline greedy oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .schedule import (
    Action,
    BanditParams,
    PhaseState,
    RunTrace,
    ScheduleError,
    compute_beta,
    compute_sample_size,
    make_params,
    sample_candidate_set,
    select_empirical_best,
    validate_horizon,
)

Oracle = Callable[[Sequence[int]], float]

BRUTE_FORCE_MAX_ARMS = 20
BRUTE_FORCE_MAX_SETS = 10**6


class HorizonError(ValueError):
    """The horizon fails the validity check and the run was not forced."""


class BudgetExceededError(ValueError):
    """Exhaustive search would exceed its combinatorial budget."""


@dataclass(frozen=True)
class PhaseRecord:
    phase_index: int
    committed: Action
    means: Dict[int, float]
    chosen: int


@dataclass
class _Schedule:
    actions: List[Action]
    rewards: np.ndarray
    phase: np.ndarray
    phase_ends: List[int]
    committed: List[int]
    log: List[PhaseRecord]


def _execute(
    env, params: BanditParams, rng: np.random.Generator, steps: int, explore_only: bool = False
) -> _Schedule:
    """Run the phase loop then exploit, stopping after ``steps`` plays."""
    n, k, m = params.n, params.k, params.m
    rewards = np.empty(steps, dtype=np.float64)
    phase = np.full(steps, k + 1, dtype=np.int32)
    actions: List[Action] = []
    phase_ends: List[int] = []
    committed: List[int] = []
    log: List[PhaseRecord] = []
    t = 0
    for i in range(1, k + 1):
        if t >= steps:
            break
        chosen = set(committed)
        remaining = [a for a in range(n) if a not in chosen]
        candidates = sample_candidate_set(remaining, compute_sample_size(n, i, params.beta), rng)
        state = PhaseState(i, tuple(committed), candidates, m)
        for a in candidates:
            action = state.committed_set + (a,)
            take = min(m, steps - t)
            r = env.sample(action, rng, take)
            rewards[t : t + take] = r
            phase[t : t + take] = i
            actions.extend([action] * take)
            state.record(a, r)
            t += take
            if take < m:
                break
        if any(state.play_counts[a] < m for a in candidates):
            break  # horizon ran out mid-phase
        best = select_empirical_best(state)
        log.append(PhaseRecord(i, state.committed_set, state.means(), best))
        committed.append(best)
        phase_ends.append(t)
    if t < steps and len(committed) == k and not explore_only:
        action = tuple(committed)
        rewards[t:] = env.sample(action, rng, steps - t)
        actions.extend([action] * (steps - t))
        t = steps
    if t < steps:
        rewards, phase = rewards[:t], phase[:t]
    return _Schedule(actions, rewards, phase, phase_ends, committed, log)


def _prepare(env, k: int, t_horizon: int, epsilon: Optional[float], force: bool):
    n = env.arm_count
    if not 1 <= k <= n:
        raise ScheduleError(f"need 1 <= k <= n, got k={k}, n={n}")
    report = validate_horizon(n, k, t_horizon)
    params, warnings = make_params(n, k, t_horizon, epsilon)
    if not report.valid:
        detail = (
            f"T={t_horizon} vs n(k+1)sqrt(ln T)={report.required:.1f}, "
            f"exploration m*sum(s_i)={report.exploration_length}"
        )
        if not force:
            raise HorizonError(f"horizon check failed: {detail}")
        warnings.append(f"horizon check failed (forced): {detail}")
    return params, warnings, not report.valid


def run_sgb(
    env,
    k: int,
    t_horizon: int,
    rng: np.random.Generator,
    epsilon: Optional[float] = None,
    force: bool = False,
    method: str = "sgb",
) -> RunTrace:
    """Stochastic-greedy explore-then-commit over ``t_horizon`` steps.

    Phase ``i`` plays ``S^(i-1) + {a}`` ``m`` times for each of ``s_i``
    random candidates ``a``, commits the empirical best, and after ``k``
    phases the committed set is played until the horizon. ``epsilon``
    defaults to the regret-optimal value for ``(n, k, T)``.
    """
    params, warnings, forced = _prepare(env, k, t_horizon, epsilon, force)
    run = _execute(env, params, rng, t_horizon)
    if len(run.phase_ends) < k:
        warnings.append(
            f"exploration needs {params.exploration_length} steps; "
            f"horizon ended during phase {len(run.phase_ends) + 1}"
        )
    return RunTrace(
        actions=run.actions,
        rewards=run.rewards,
        phase=run.phase,
        phase_ends=run.phase_ends,
        committed_arms=run.committed,
        params=params,
        method=method,
        forced=forced,
        warnings=warnings,
        planned_exploration=[params.exploration_length],
    )


def etcg_epsilon(k: int) -> float:
    eps = math.exp(-k)
    if eps == 0.0:
        raise ScheduleError(f"exp(-{k}) underflows; ETCG needs k <= 745")
    return eps


def run_etcg(
    env, k: int, t_horizon: int, rng: np.random.Generator, force: bool = False
) -> RunTrace:
    """Full-scan greedy explore-then-commit: SGB with ``epsilon = exp(-k)``, so beta = 1."""
    return run_sgb(env, k, t_horizon, rng, epsilon=etcg_epsilon(k), force=force, method="etcg")


def run_sgb_anytime(
    env,
    k: int,
    t_initial: int,
    total_steps: int,
    rng: np.random.Generator,
    epsilon: Optional[float] = None,
    force: bool = False,
) -> RunTrace:
    """Doubling-trick restarts: windows of length T0, 2 T0, 4 T0, ...

    Each window is a fresh SGB run tuned for its own length; the last one is
    cut off when ``total_steps`` is reached.
    """
    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1, got {total_steps}")
    actions: List[Action] = []
    rewards, phases = [], []
    phase_ends: List[int] = []
    windows: List[int] = []
    planned: List[int] = []
    warnings: List[str] = []
    forced = False
    first_params = None
    committed: List[int] = []
    offset, length = 0, t_initial
    while offset < total_steps:
        params, w_warn, w_forced = _prepare(env, k, length, epsilon, force)
        first_params = first_params or params
        steps = min(length, total_steps - offset)
        run = _execute(env, params, rng, steps)
        windows.append(offset)
        planned.append(params.exploration_length)
        warnings.extend(f"window@{offset}: {w}" for w in w_warn)
        forced = forced or w_forced
        actions.extend(run.actions)
        rewards.append(run.rewards)
        phases.append(run.phase)
        phase_ends.extend(offset + e for e in run.phase_ends)
        committed = run.committed
        offset += steps
        length *= 2
    return RunTrace(
        actions=actions,
        rewards=np.concatenate(rewards),
        phase=np.concatenate(phases),
        phase_ends=phase_ends,
        committed_arms=committed,
        params=first_params,
        method="sgb-anytime",
        forced=forced,
        warnings=warnings,
        windows=windows,
        planned_exploration=planned,
    )


def run_random_constant(env, k: int, t_horizon: int, rng: np.random.Generator) -> RunTrace:
    """Play one uniformly random k-set for the whole horizon."""
    n = env.arm_count
    params, warnings = make_params(n, k, t_horizon)
    chosen = sorted(int(a) for a in rng.choice(n, size=k, replace=False))
    action = tuple(chosen)
    return RunTrace(
        actions=[action] * t_horizon,
        rewards=env.sample(action, rng, t_horizon),
        phase=np.full(t_horizon, k + 1, dtype=np.int32),
        phase_ends=[],
        committed_arms=chosen,
        params=params,
        method="random",
        warnings=warnings,
        planned_exploration=[0],
    )


@dataclass(frozen=True)
class OfflineResult:
    selected_set: Tuple[int, ...]
    value: float
    evaluations: int


def _greedy(
    oracle: Oracle, arm_count: int, k: int, candidates_for: Callable[[int, List[int]], List[int]]
) -> OfflineResult:
    if not 0 <= k <= arm_count:
        raise ValueError(f"need 0 <= k <= arm_count, got k={k}, arm_count={arm_count}")
    chosen: List[int] = []
    if k == 0:
        return OfflineResult((), float(oracle(())), 1)
    current, calls = -math.inf, 0
    for i in range(1, k + 1):
        picked = set(chosen)
        remaining = [a for a in range(arm_count) if a not in picked]
        best, best_value = None, -math.inf
        for a in sorted(candidates_for(i, remaining)):
            value = float(oracle(tuple(chosen) + (a,)))
            calls += 1
            if value > best_value:
                best, best_value = a, value
        chosen.append(best)
        current = best_value
    return OfflineResult(tuple(sorted(chosen)), current, calls)


def offline_greedy(oracle: Oracle, arm_count: int, k: int) -> OfflineResult:
    """Classic greedy: each pass adds the arm with the largest marginal gain.

    Gains share the base value within a pass, so comparing ``f(S + a)``
    picks the same arm; ``evaluations`` is ``sum(n - i + 1)``.
    """
    return _greedy(oracle, arm_count, k, lambda i, remaining: remaining)


def offline_stochastic_greedy(
    oracle: Oracle, arm_count: int, k: int, epsilon: float, rng: np.random.Generator
) -> OfflineResult:
    """Greedy where each pass only scores a random subset of ``s_i`` remaining arms."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    beta = compute_beta(epsilon, k) if k else 0.0

    def candidates(i: int, remaining: List[int]) -> List[int]:
        return sample_candidate_set(remaining, compute_sample_size(arm_count, i, beta), rng)

    return _greedy(oracle, arm_count, k, candidates)


def brute_force_opt(oracle: Oracle, arm_count: int, k: int) -> OfflineResult:
    """Exact maximizer over all sets of size <= k; ties go to the lexicographically smallest."""
    if arm_count > BRUTE_FORCE_MAX_ARMS:
        raise BudgetExceededError(
            f"brute force limited to {BRUTE_FORCE_MAX_ARMS} arms, got {arm_count}"
        )
    if not 0 <= k <= arm_count:
        raise ValueError(f"need 0 <= k <= arm_count, got k={k}, arm_count={arm_count}")
    total = sum(math.comb(arm_count, j) for j in range(k + 1))
    if total > BRUTE_FORCE_MAX_SETS:
        raise BudgetExceededError(f"{total} subsets exceed the budget of {BRUTE_FORCE_MAX_SETS}")
    best: Tuple[int, ...] = ()
    best_value = -math.inf
    for size in range(k + 1):
        for subset in itertools.combinations(range(arm_count), size):
            value = float(oracle(subset))
            if value > best_value or (value == best_value and subset < best):
                best, best_value = subset, value
    return OfflineResult(best, best_value, total)
