"""Probabilistic coverage: a monotone submodular family with an exact mean.

Arm ``a`` covers element ``u`` independently with probability ``p[a, u]`` in
each realization; the reward is the covered fraction of the universe.

File format (UTF-8, one ``key = value`` per line, ``#`` comments)::

    format = coverage-instance
    arms = 3
    universe = 2
    row 0 = 0.5 0.25
    row 1 = 0 1
    row 2 = 0.125 0.75

Values are written with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TextIO, Tuple

import numpy as np

from .graph import ParseError

FORMAT_TAG = "coverage-instance"
_CHUNK = 1 << 16  # rows per batch when sampling long action repeats


@dataclass(frozen=True, eq=False)
class CoverageInstance:
    cover_prob: np.ndarray  # shape (arm_count, universe_size)

    def __post_init__(self) -> None:
        p = np.array(self.cover_prob, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"cover_prob must be a non-empty 2-D array, got shape {p.shape}")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValueError("cover probabilities must lie in [0, 1]")
        p.flags.writeable = False
        object.__setattr__(self, "cover_prob", p)

    @property
    def arm_count(self) -> int:
        return self.cover_prob.shape[0]

    @property
    def universe_size(self) -> int:
        return self.cover_prob.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, CoverageInstance) and np.array_equal(
            self.cover_prob, other.cover_prob
        )

    def _rows(self, action: Sequence[int]) -> np.ndarray:
        idx = np.asarray(list(action), dtype=np.int64)
        if len(idx) and (idx.min() < 0 or idx.max() >= self.arm_count):
            bad = [int(a) for a in idx if not 0 <= a < self.arm_count]
            raise ValueError(f"unknown arm ids {bad} (arm_count={self.arm_count})")
        return idx

    def hit_prob(self, action: Sequence[int]) -> np.ndarray:
        """Per-element probability of being covered by at least one arm."""
        idx = self._rows(action)
        return 1.0 - np.prod(1.0 - self.cover_prob[idx], axis=0)


def coverage_expected(instance: CoverageInstance, action: Sequence[int]) -> float:
    return float(instance.hit_prob(action).mean())


def coverage_samples(
    instance: CoverageInstance, action: Sequence[int], rng: np.random.Generator, size: int
) -> np.ndarray:
    # Elements are covered independently of each other, so drawing each
    # element's "covered by someone" indicator directly has the same law as
    # drawing every (arm, element) pair.
    q = instance.hit_prob(action)
    out = np.empty(size, dtype=np.float64)
    for start in range(0, size, _CHUNK):
        stop = min(size, start + _CHUNK)
        hits = rng.random((stop - start, q.shape[0])) < q
        out[start:stop] = hits.sum(axis=1) / q.shape[0]
    return out


def coverage_sample(
    instance: CoverageInstance, action: Sequence[int], rng: np.random.Generator
) -> float:
    return float(coverage_samples(instance, action, rng, 1)[0])


def random_coverage_instance(
    arms: int,
    universe: int,
    rng: np.random.Generator,
    p_max: float = 1.0,
    density: float = 1.0,
) -> CoverageInstance:
    """Uniform ``p[a,u]`` in ``[0, p_max]``; each entry kept with prob ``density``."""
    p = rng.uniform(0.0, p_max, size=(arms, universe))
    if density < 1.0:
        p *= rng.random((arms, universe)) < density
    return CoverageInstance(p)


@dataclass(frozen=True)
class CoverageEnv:
    """Bandit wrapper around a coverage instance; its oracle is exact."""

    instance: CoverageInstance
    exact = True

    @property
    def arm_count(self) -> int:
        return self.instance.arm_count

    def sample(self, action: Sequence[int], rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return coverage_samples(self.instance, action, rng, size)

    def expected(self, action: Sequence[int]) -> float:
        return coverage_expected(self.instance, action)

    def expected_with_error(self, action: Sequence[int]) -> Tuple[float, float]:
        return self.expected(action), 0.0


def write_coverage_instance(instance: CoverageInstance, stream: TextIO) -> None:
    stream.write(f"format = {FORMAT_TAG}\n")
    stream.write(f"arms = {instance.arm_count}\n")
    stream.write(f"universe = {instance.universe_size}\n")
    for a, row in enumerate(instance.cover_prob):
        stream.write(f"row {a} = " + " ".join(repr(float(x)) for x in row) + "\n")


def load_coverage_instance(stream: TextIO, source: str = "<stream>") -> CoverageInstance:
    header = {}
    rows = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = key.strip(), value.strip()
        if key.startswith("row "):
            try:
                a = int(key[4:])
                rows[a] = [float(x) for x in value.split()]
            except ValueError:
                raise ParseError(f"malformed row {line!r}", lineno, source) from None
        elif key in ("format", "arms", "universe"):
            header[key] = (value, lineno)
        else:
            raise ParseError(f"unknown key {key!r}", lineno, source)
    if header.get("format", ("",))[0] != FORMAT_TAG:
        raise ParseError(f"missing 'format = {FORMAT_TAG}'", 1, source)
    try:
        arms = int(header["arms"][0])
        universe = int(header["universe"][0])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad or missing arms/universe header ({exc})", 1, source) from None
    if sorted(rows) != list(range(arms)):
        raise ParseError(f"expected rows 0..{arms - 1}, found {sorted(rows)}", 1, source)
    if any(len(r) != universe for r in rows.values()):
        raise ParseError(f"every row needs {universe} values", 1, source)
    try:
        return CoverageInstance(np.array([rows[a] for a in range(arms)]))
    except ValueError as exc:
        raise ParseError(str(exc), 1, source) from None


def read_coverage_instance(path) -> CoverageInstance:
    with open(path, encoding="utf-8") as fh:
        return load_coverage_instance(fh, source=str(path))


def save_coverage_instance(instance: CoverageInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_coverage_instance(instance, fh)
