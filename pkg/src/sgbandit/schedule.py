"""Schedule arithmetic and per-phase bookkeeping for stochastic-greedy bandits.

Everything here is a pure function of its inputs (plus an explicit
``numpy.random.Generator`` where sampling is involved). Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

Action = Tuple[int, ...]

#: Largest usable epsilon; values at or above 1 are clamped here by ``make_params``.
EPSILON_CEILING = 1.0 - 1e-9


class ScheduleError(ValueError):
    """Raised for out-of-domain schedule parameters."""


def _require_horizon(t_horizon: int) -> None:
    if t_horizon < 2:
        raise ScheduleError(f"horizon must be >= 2 so that log(T) > 0, got {t_horizon}")


def compute_epsilon_star(n: int, k: int, t_horizon: int) -> float:
    """Regret-optimal subsampling parameter ``(n k^2 / (4 T ln T))^(1/3)``.

    Not clamped: small horizons can give values >= 1.
    """
    _require_horizon(t_horizon)
    return (n * k * k / (4.0 * t_horizon * math.log(t_horizon))) ** (1.0 / 3.0)


def raw_m(n: int, k: int, t_horizon: int) -> float:
    """Unrounded per-action sample count ``(k T / (2 n sqrt(ln T)))^(2/3)``."""
    _require_horizon(t_horizon)
    return (k * t_horizon / (2.0 * n * math.sqrt(math.log(t_horizon)))) ** (2.0 / 3.0)


def compute_m(n: int, k: int, t_horizon: int) -> int:
    return max(1, math.ceil(raw_m(n, k, t_horizon)))


def compute_beta(epsilon: float, k: int) -> float:
    if not 0.0 < epsilon <= 1.0:
        raise ScheduleError(f"epsilon must lie in (0, 1], got {epsilon}")
    if epsilon == 1.0:
        return 0.0
    return math.log(1.0 / epsilon) / k


def compute_sample_size(n: int, phase_index: int, beta: float) -> int:
    """Candidate count ``ceil((n - i + 1) * min(1, beta))``, at least 1."""
    if not 1 <= phase_index <= n:
        raise ScheduleError(f"phase index {phase_index} outside 1..{n}")
    if beta < 0:
        raise ScheduleError(f"beta must be non-negative, got {beta}")
    remaining = n - phase_index + 1
    if beta >= 1.0:
        return remaining
    return min(remaining, max(1, math.ceil(remaining * beta)))


@dataclass(frozen=True)
class BanditParams:
    n: int
    k: int
    t_horizon: int
    epsilon: float
    beta: float
    m: int
    rad: float

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ScheduleError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ScheduleError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.m < 1:
            raise ScheduleError(f"m must be >= 1, got {self.m}")

    @property
    def sample_sizes(self) -> List[int]:
        return [compute_sample_size(self.n, i, self.beta) for i in range(1, self.k + 1)]

    @property
    def exploration_length(self) -> int:
        """Scheduled number of exploration steps, ``m * sum(s_i)``; may exceed T."""
        return self.m * sum(self.sample_sizes)


def make_params(
    n: int, k: int, t_horizon: int, epsilon: Optional[float] = None
) -> Tuple[BanditParams, List[str]]:
    """Derive the full schedule. Returns the params and any warnings raised.

    ``epsilon`` overrides the optimal value; it changes beta and the sample
    sizes but never ``m``.
    """
    warnings: List[str] = []
    m = compute_m(n, k, t_horizon)
    eps = compute_epsilon_star(n, k, t_horizon) if epsilon is None else float(epsilon)
    if eps >= 1.0:
        warnings.append(f"epsilon {eps:.6g} >= 1 clamped to {EPSILON_CEILING!r}")
        eps = EPSILON_CEILING
    beta = compute_beta(eps, k)
    rad = math.sqrt(math.log(t_horizon) / m)
    return BanditParams(n, k, t_horizon, eps, beta, m, rad), warnings


@dataclass(frozen=True)
class HorizonReport:
    n: int
    k: int
    t_horizon: int
    required: float  # n (k+1) sqrt(ln T)
    exploration_length: int  # m * sum(s_i) under the default epsilon
    bound_ok: bool
    budget_ok: bool

    @property
    def valid(self) -> bool:
        return self.bound_ok and self.budget_ok


def validate_horizon(n: int, k: int, t_horizon: int) -> HorizonReport:
    required = n * (k + 1) * math.sqrt(math.log(t_horizon)) if t_horizon >= 2 else math.inf
    if t_horizon < 2 or k > n:
        return HorizonReport(n, k, t_horizon, required, 0, False, False)
    params, _ = make_params(n, k, t_horizon)
    length = params.exploration_length
    return HorizonReport(
        n, k, t_horizon, required, length, t_horizon >= required, length <= t_horizon
    )


def minimal_horizon(n: int, k: int) -> int:
    """Smallest T >= 2 with ``T >= n (k+1) sqrt(ln T)``."""

    def ok(t: int) -> bool:
        return t >= n * (k + 1) * math.sqrt(math.log(t))

    hi = 2
    while not ok(hi):
        hi *= 2
    lo = hi // 2
    # T / sqrt(ln T) is increasing for T >= 2, so bisection is exact
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return max(hi, 2)


def sample_candidate_set(
    remaining: Sequence[int], s: int, rng: np.random.Generator
) -> List[int]:
    """Draw ``s`` distinct arms uniformly without replacement.

    ``remaining`` is sorted first so the draw depends only on its contents and
    the generator state, not on iteration order of the caller's container.
    """
    pool = sorted(remaining)
    if not 1 <= s <= len(pool):
        raise ScheduleError(f"cannot sample {s} arms from {len(pool)} remaining")
    picks = rng.choice(len(pool), size=s, replace=False)
    return [pool[int(j)] for j in picks]


@dataclass
class PhaseState:
    phase_index: int
    committed_set: Action
    candidate_set: List[int]
    m: int
    reward_sums: Dict[int, float] = field(default_factory=dict)
    play_counts: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        overlap = set(self.candidate_set) & set(self.committed_set)
        if overlap:
            raise ScheduleError(f"candidates {sorted(overlap)} already committed")
        for a in self.candidate_set:
            self.reward_sums.setdefault(a, 0.0)
            self.play_counts.setdefault(a, 0)

    @property
    def sample_size(self) -> int:
        return len(self.candidate_set)

    def record(self, arm: int, rewards: np.ndarray) -> None:
        plays = self.play_counts[arm] + len(rewards)
        if plays > self.m:
            raise ScheduleError(f"arm {arm} played {plays} > m={self.m} times")
        self.play_counts[arm] = plays
        self.reward_sums[arm] += float(np.sum(rewards))

    def means(self) -> Dict[int, float]:
        return {a: self.reward_sums[a] / self.m for a in self.candidate_set}


def select_empirical_best(state: PhaseState) -> int:
    """Candidate with the largest empirical mean; ties go to the lowest arm id."""
    short = [a for a in state.candidate_set if state.play_counts[a] != state.m]
    if short:
        raise ScheduleError(f"candidates {sorted(short)} not yet played m={state.m} times")
    # every candidate has m plays, so comparing sums compares means exactly
    sums = state.reward_sums
    return min(state.candidate_set, key=lambda a: (-sums[a], a))


@dataclass
class RunTrace:
    """Everything a single online run did.

    ``phase`` labels each step with its exploration phase ``1..k``, or ``k+1``
    while exploiting. ``phase_ends`` lists T_1.. for phases that completed
    within the horizon; when the schedule overruns T there are fewer than
    ``k`` of them and ``committed_arms`` is incomplete.
    """

    actions: List[Action]
    rewards: np.ndarray
    phase: np.ndarray
    phase_ends: List[int]
    committed_arms: List[int]
    params: BanditParams
    method: str = "sgb"
    forced: bool = False
    warnings: List[str] = field(default_factory=list)
    # start offsets of restart windows (anytime runs); [0] otherwise
    windows: List[int] = field(default_factory=lambda: [0])
    # scheduled exploration length per window, not capped by the horizon
    planned_exploration: List[int] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.rewards)

    @property
    def exploration_end(self) -> int:
        """Step after which no more exploration happens (T_k, or T if cut short)."""
        exploring = np.flatnonzero(self.phase <= self.params.k)
        return int(exploring[-1]) + 1 if len(exploring) else 0

    @property
    def exploration_complete(self) -> bool:
        return len(self.phase_ends) >= self.params.k

    def same_as(self, other: "RunTrace") -> bool:
        """Bitwise equality of everything but labels and diagnostics."""
        return (
            self.actions == other.actions
            and self.rewards.tobytes() == other.rewards.tobytes()
            and self.phase.tobytes() == other.phase.tobytes()
            and self.phase_ends == other.phase_ends
            and self.committed_arms == other.committed_arms
            and self.params == other.params
            and self.windows == other.windows
        )
