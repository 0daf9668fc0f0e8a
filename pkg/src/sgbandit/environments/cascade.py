"""Independent-cascade diffusion on undirected graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numba
import numpy as np

from .graph import Graph


@numba.njit(cache=True)
def _cascade_counts(indptr, indices, seeds, p, rng, reps):
    # FIFO order processes activation layers in sequence, so every newly
    # active node makes one attempt per still-inactive neighbour. A neighbour
    # already activated earlier in the same layer is skipped, which leaves
    # the activation law unchanged.
    n = indptr.shape[0] - 1
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    out = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        mark = r + 1
        size = 0
        for s in seeds:
            if stamp[s] != mark:
                stamp[s] = mark
                queue[size] = s
                size += 1
        head = 0
        while head < size:
            u = queue[head]
            head += 1
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if stamp[v] != mark and rng.random() < p:
                    stamp[v] = mark
                    queue[size] = v
                    size += 1
        out[r] = size
    return out


def _check(graph: Graph, seeds: Sequence[int], p: float) -> np.ndarray:
    arr = np.asarray(sorted(set(int(s) for s in seeds)), dtype=np.int64)
    if len(arr) and (arr[0] < 0 or arr[-1] >= graph.node_count):
        bad = [int(s) for s in arr if not 0 <= s < graph.node_count]
        raise ValueError(f"seed ids {bad} outside 0..{graph.node_count - 1}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"infection probability must lie in [0, 1], got {p}")
    return arr


def cascade_counts(
    graph: Graph, seeds: Sequence[int], p: float, rng: np.random.Generator, reps: int
) -> np.ndarray:
    """Activated-node counts (seeds included) of ``reps`` independent cascades."""
    arr = _check(graph, seeds, p)
    if reps <= 0:
        return np.empty(0, dtype=np.int64)
    return _cascade_counts(graph.indptr, graph.indices, arr, float(p), rng, int(reps))


def simulate_cascade(
    graph: Graph, seeds: Sequence[int], p: float, rng: np.random.Generator
) -> int:
    return int(cascade_counts(graph, seeds, p, rng, 1)[0])


def influence_reward(
    graph: Graph, seeds: Sequence[int], p: float, rng: np.random.Generator
) -> float:
    return simulate_cascade(graph, seeds, p, rng) / graph.node_count


def estimate_expected_spread(
    graph: Graph, seeds: Sequence[int], p: float, reps: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of the normalized spread."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    rewards = cascade_counts(graph, seeds, p, rng, reps) / graph.node_count
    mean = float(rewards.mean())
    if reps == 1:
        return mean, 0.0
    return mean, float(rewards.std(ddof=1) / math.sqrt(reps))


@dataclass(frozen=True)
class CascadeEnv:
    """Influence-maximization bandit: arms are seed nodes, reward is spread fraction.

    The expected-value oracle is Monte Carlo. Every oracle call reseeds from
    ``oracle_seed`` so ``expected`` is a deterministic function of the set.
    """

    graph: Graph
    p: float = 0.1
    mc_reps: int = 200
    oracle_seed: int = 0
    exact = False

    @property
    def arm_count(self) -> int:
        return self.graph.node_count

    def sample(self, action: Sequence[int], rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return cascade_counts(self.graph, action, self.p, rng, size) / self.graph.node_count

    def expected_with_error(self, action: Sequence[int]) -> Tuple[float, float]:
        rng = np.random.default_rng(self.oracle_seed)
        return estimate_expected_spread(self.graph, action, self.p, self.mc_reps, rng)

    def expected(self, action: Sequence[int]) -> float:
        return self.expected_with_error(action)[0]
