"""Brute-force verification of monotonicity and submodularity on small ground sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

MAX_CHECK_ARMS = 12


@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    evaluations: int
    kind: Optional[str] = None  # "monotone" or "submodular"
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...], int]] = None  # (A, B, x)
    gap: float = 0.0

    def __str__(self) -> str:
        if self.passed:
            return f"pass ({self.evaluations} evaluations)"
        a, b, x = self.witness
        return f"{self.kind} violated: A={a}, B={b}, x={x}, gap={self.gap:.3g}"


def _members(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def check_monotone_submodular(
    oracle: Callable[[Sequence[int]], float], arm_count: int, tol: float = 1e-9
) -> SubmodularityReport:
    """Evaluate ``oracle`` on every subset and test both properties.

    Uses the local forms, which are equivalent to the global ones:
    ``f(A) <= f(A + x)`` for every ``A`` and ``x`` not in ``A``, and
    ``f(A + x) - f(A) >= f(A + y + x) - f(A + y)`` for distinct ``x, y`` not in ``A``.
    """
    if arm_count > MAX_CHECK_ARMS:
        raise ValueError(f"brute-force check limited to {MAX_CHECK_ARMS} arms, got {arm_count}")
    n = arm_count
    values = [float(oracle(_members(mask, n))) for mask in range(1 << n)]
    evals = len(values)
    for mask in range(1 << n):
        for x in range(n):
            bit = 1 << x
            if mask & bit:
                continue
            if values[mask | bit] < values[mask] - tol:
                return SubmodularityReport(
                    False, evals, "monotone",
                    (_members(mask, n), _members(mask | bit, n), x),
                    values[mask] - values[mask | bit],
                )
    for mask in range(1 << n):
        for x in range(n):
            bx = 1 << x
            if mask & bx:
                continue
            gain = values[mask | bx] - values[mask]
            for y in range(n):
                by = 1 << y
                if y == x or mask & by:
                    continue
                later = values[mask | by | bx] - values[mask | by]
                if later > gain + tol:
                    return SubmodularityReport(
                        False, evals, "submodular",
                        (_members(mask, n), _members(mask | by, n), x),
                        later - gain,
                    )
    return SubmodularityReport(True, evals)
