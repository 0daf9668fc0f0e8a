"""Regret bookkeeping, diagnostics and reproducible experiment sweeps.

Per-run seeds come from ``derive_seed``: the first 64-bit word of
``numpy.random.SeedSequence(master_seed, spawn_key=(method_index, k, T, rep))``.
The run's generator is ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import (
    _execute,
    brute_force_opt,
    offline_greedy,
    run_etcg,
    run_random_constant,
    run_sgb,
    run_sgb_anytime,
)
from .environments import CascadeEnv, CoverageEnv, read_coverage_instance, read_edge_list
from .environments.coverage import FORMAT_TAG, random_coverage_instance
from .schedule import BanditParams, RunTrace, minimal_horizon, validate_horizon

log = logging.getLogger(__name__)

METHODS = ("sgb", "etcg", "sgb-anytime", "random")
SUMMARY_COLUMNS = (
    "method", "epsilon", "k", "horizon", "rep", "seed", "cum_reward", "regret",
    "regret_ref", "regret_ref_stderr", "exploration_end", "exploit_mean_reward", "wall_ms",
)
TRACE_COLUMNS = ("t", "phase", "action_size", "reward", "cum_reward")
AGGREGATE_COLUMNS = (
    "method", "epsilon", "k", "horizon", "runs", "regret_mean", "regret_std",
    "cum_reward_mean", "exploration_end_mean",
)


def fmt(value) -> str:
    """CSV cell text: 9 significant digits for floats, blank for missing."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return format(float(value), ".9g")
    return str(value)


# --------------------------------------------------------------------- regret


def compute_reference_value(env, k: int, mode: str = "greedy") -> Tuple[float, float]:
    """Per-step reference reward and its standard error.

    ``greedy`` uses ``f(S_grd)`` from offline greedy on the environment's
    oracle. ``optimal`` uses ``(1 - 1/e) f(S*)`` with ``S*`` from brute force.
    """
    if mode == "greedy":
        chosen = offline_greedy(env.expected, env.arm_count, k).selected_set
        return env.expected_with_error(chosen)
    if mode == "optimal":
        chosen = brute_force_opt(env.expected, env.arm_count, k).selected_set
        value, err = env.expected_with_error(chosen)
        scale = 1.0 - 1.0 / math.e
        return scale * value, scale * err
    raise ValueError(f"unknown reference mode {mode!r}; use 'greedy' or 'optimal'")


def cumulative_regret_series(rewards: Sequence[float], f_ref: float) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=np.float64)
    t = np.arange(1, len(rewards) + 1, dtype=np.float64)
    return t * f_ref - np.cumsum(rewards)


def moving_average(series: Sequence[float], window: int) -> np.ndarray:
    """Trailing mean over the last ``min(t, window)`` values."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(series, dtype=np.float64)
    if len(x) == 0:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(0, idx - window)
    out = (csum[idx] - csum[lo]) / (idx - lo)
    # a window mean lies in the data range; clip only removes cumsum rounding
    return np.clip(out, x.min(), x.max())


def aggregate_runs(series: Sequence[Sequence[float]]) -> Tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and sample (n-1) standard deviation; std is 0 for one run."""
    if len(series) == 0:
        raise ValueError("need at least one run to aggregate")
    lengths = {np.size(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"runs in one group have different lengths: {sorted(lengths)}")
    stack = np.asarray([np.asarray(s, dtype=np.float64) for s in series])
    mean = stack.mean(axis=0)
    std = stack.std(axis=0, ddof=1) if len(stack) > 1 else np.zeros_like(mean)
    return mean, std


# --------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class CleanEventEstimate:
    frequency: float
    clean_runs: int
    runs: int
    bound: float  # 1 - 2/T

    @property
    def stderr(self) -> float:
        p = self.frequency
        return math.sqrt(p * (1 - p) / self.runs)


def estimate_clean_event_rate(
    env, params: BanditParams, repetitions: int, rng: np.random.Generator, rad_scale: float = 1.0
) -> CleanEventEstimate:
    """Fraction of exploration runs in which every candidate's empirical
    mean landed strictly within ``rad`` of its exact expectation."""
    if not getattr(env, "exact", False):
        raise ValueError("clean-event estimation needs an environment with an exact oracle")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    radius = params.rad * rad_scale
    steps = min(params.t_horizon, params.exploration_length)
    cache: Dict[Tuple[int, ...], float] = {}
    clean = 0
    for _ in range(repetitions):
        run = _execute(env, params, rng, steps, explore_only=True)
        ok = True
        for record in run.log:
            for a, mean in record.means.items():
                key = tuple(sorted(record.committed + (a,)))
                if key not in cache:
                    cache[key] = env.expected(key)
                if not abs(mean - cache[key]) < radius:
                    ok = False
                    break
            if not ok:
                break
        clean += ok
    return CleanEventEstimate(clean / repetitions, clean, repetitions, 1 - 2 / params.t_horizon)


# ------------------------------------------------------------------ summaries


@dataclass(frozen=True)
class RunSummary:
    method: str
    epsilon: Optional[float]
    k: int
    horizon: int
    rep: int
    seed: int
    cum_reward: float
    regret: float
    regret_ref: float
    regret_ref_stderr: float
    exploration_end: int
    exploit_mean_reward: Optional[float]
    wall_ms: Optional[float] = None

    def row(self) -> List[str]:
        return [fmt(getattr(self, c)) for c in SUMMARY_COLUMNS]


def summarize_run(
    trace: RunTrace,
    f_ref: float,
    f_ref_stderr: float = 0.0,
    rep: int = 0,
    seed: int = 0,
    wall_ms: Optional[float] = None,
) -> RunSummary:
    horizon = trace.horizon
    cum = float(np.sum(trace.rewards))
    exploiting = trace.rewards[trace.phase == trace.params.k + 1]
    return RunSummary(
        method=trace.method,
        epsilon=None if trace.method == "random" else trace.params.epsilon,
        k=trace.params.k,
        horizon=horizon,
        rep=rep,
        seed=seed,
        cum_reward=cum,
        regret=horizon * f_ref - cum,
        regret_ref=horizon * f_ref,
        regret_ref_stderr=horizon * f_ref_stderr,
        exploration_end=trace.exploration_end,
        exploit_mean_reward=float(exploiting.mean()) if len(exploiting) else None,
        wall_ms=wall_ms,
    )


def write_trace_csv(trace: RunTrace, path) -> None:
    cum = np.cumsum(trace.rewards)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for t, (phase, action, reward, c) in enumerate(
            zip(trace.phase, trace.actions, trace.rewards, cum), start=1
        ):
            writer.writerow([t, int(phase), len(action), fmt(reward), fmt(c)])


def write_summary_csv(summaries: Sequence[RunSummary], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow(s.row())


def aggregate_summaries(summaries: Sequence[RunSummary]) -> List[List[str]]:
    groups: "OrderedDict[tuple, List[RunSummary]]" = OrderedDict()
    for s in summaries:
        groups.setdefault((s.method, s.epsilon, s.k, s.horizon), []).append(s)
    rows = []
    for (method, eps, k, horizon), group in groups.items():
        mean, std = aggregate_runs([[s.regret] for s in group])
        rows.append([
            method, fmt(eps), k, horizon, len(group), fmt(mean[0]), fmt(std[0]),
            fmt(np.mean([s.cum_reward for s in group])),
            fmt(np.mean([s.exploration_end for s in group])),
        ])
    return rows


# ---------------------------------------------------------------- experiments


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    name: str
    epsilon: Optional[float] = None
    t_initial: Optional[int] = None  # sgb-anytime first window

    @property
    def label(self) -> str:
        return self.name if self.epsilon is None else f"{self.name}(eps={self.epsilon:g})"


@dataclass
class ExperimentConfig:
    """Sweep description; see ``ExperimentConfig.from_dict`` for the JSON keys."""

    environment: Dict[str, object]
    methods: List[MethodSpec]
    k: List[int]
    horizons: List[int]
    repetitions: int = 10
    master_seed: int = 0
    reference: str = "greedy"
    output_dir: str = "results"
    write_traces: bool = False
    force: bool = False
    jobs: int = 1
    record_wall_time: bool = False
    base_dir: str = "."

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m.name not in METHODS:
                raise ConfigError(f"unknown method {m.name!r}; choose from {', '.join(METHODS)}")
        if list(self.horizons) != sorted(self.horizons) or not self.horizons:
            raise ConfigError(f"horizons must be a non-empty ascending list, got {self.horizons}")
        if not self.k or any(k < 1 for k in self.k):
            raise ConfigError(f"k values must be positive, got {self.k}")
        if self.reference not in ("greedy", "optimal"):
            raise ConfigError(f"reference must be 'greedy' or 'optimal', got {self.reference!r}")

    @classmethod
    def from_dict(cls, data: Dict[str, object], base_dir: str = ".") -> "ExperimentConfig":
        known = {
            "environment", "methods", "k", "horizons", "repetitions", "master_seed",
            "reference", "output_dir", "write_traces", "force", "jobs", "record_wall_time",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            methods = [
                MethodSpec(**m) if isinstance(m, dict) else MethodSpec(str(m))
                for m in data["methods"]
            ]
            k = data["k"]
            horizons = data["horizons"]
            kwargs = {key: data[key] for key in known - {"methods", "k", "horizons"} if key in data}
            return cls(
                methods=methods,
                k=[int(x) for x in (k if isinstance(k, list) else [k])],
                horizons=[int(x) for x in (horizons if isinstance(horizons, list) else [horizons])],
                base_dir=base_dir,
                **kwargs,
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1: top level must be an object")
        try:
            return cls.from_dict(data, base_dir=str(path.parent))
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def build_environment(spec: Dict[str, object], base_dir: str = "."):
    """Environment from a config mapping.

    ``{"type": "coverage", "path": ...}``,
    ``{"type": "graph", "path": ..., "p": 0.1, "mc_reps": 200, "oracle_seed": 0}`` or
    ``{"type": "random-coverage", "arms": 50, "universe": 20, "p_max": 0.3,
    "density": 1.0, "seed": 0}``.
    """
    kind = spec.get("type")
    if kind == "coverage":
        return CoverageEnv(read_coverage_instance(Path(base_dir, str(spec["path"]))))
    if kind == "graph":
        graph = read_edge_list(Path(base_dir, str(spec["path"])))
        return CascadeEnv(
            graph,
            p=float(spec.get("p", 0.1)),
            mc_reps=int(spec.get("mc_reps", 200)),
            oracle_seed=int(spec.get("oracle_seed", 0)),
        )
    if kind == "random-coverage":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        return CoverageEnv(
            random_coverage_instance(
                int(spec["arms"]),
                int(spec["universe"]),
                rng,
                p_max=float(spec.get("p_max", 1.0)),
                density=float(spec.get("density", 1.0)),
            )
        )
    raise ConfigError(f"unknown environment type {kind!r}")


def environment_from_path(path, p: float = 0.1, mc_reps: int = 200, oracle_seed: int = 0):
    """Coverage file if it carries the coverage header, else an edge list."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                is_coverage = line.replace(" ", "") == f"format={FORMAT_TAG}"
                break
        else:
            is_coverage = False
    if is_coverage:
        return CoverageEnv(read_coverage_instance(path))
    return CascadeEnv(read_edge_list(path), p=p, mc_reps=mc_reps, oracle_seed=oracle_seed)


def derive_seed(master_seed: int, method_index: int, k: int, horizon: int, rep: int) -> int:
    seq = np.random.SeedSequence(master_seed, spawn_key=(method_index, k, horizon, rep))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def run_method(
    env, spec: MethodSpec, k: int, horizon: int, rng: np.random.Generator, force: bool = False
) -> RunTrace:
    if spec.name == "sgb":
        return run_sgb(env, k, horizon, rng, epsilon=spec.epsilon, force=force)
    if spec.name == "etcg":
        return run_etcg(env, k, horizon, rng, force=force)
    if spec.name == "sgb-anytime":
        t0 = spec.t_initial or default_anytime_start(env.arm_count, k)
        return run_sgb_anytime(env, k, t0, horizon, rng, epsilon=spec.epsilon, force=force)
    if spec.name == "random":
        return run_random_constant(env, k, horizon, rng)
    raise ConfigError(f"unknown method {spec.name!r}")


def default_anytime_start(n: int, k: int) -> int:
    """Smallest T passing ``validate_horizon`` (searched upward in 1% steps)."""
    t = minimal_horizon(n, k)
    while not validate_horizon(n, k, t).valid:
        t = max(t + 1, int(t * 1.01))
    return t


@dataclass(frozen=True)
class Cell:
    index: int
    method_index: int
    method: MethodSpec
    k: int
    horizon: int
    rep: int
    seed: int


def _run_cell(env, cell: Cell, f_ref, f_err, force, trace_dir, record_time):
    start = time.perf_counter()
    try:
        trace = run_method(env, cell.method, cell.k, cell.horizon, np.random.default_rng(cell.seed), force)
    except Exception as exc:  # recorded per cell; the sweep carries on
        return cell, None, f"{type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - start) * 1000.0 if record_time else None
    summary = summarize_run(trace, f_ref, f_err, cell.rep, cell.seed, wall)
    if trace_dir is not None:
        name = f"{cell.method.name}_m{cell.method_index}_k{cell.k}_T{cell.horizon}_rep{cell.rep}.csv"
        write_trace_csv(trace, Path(trace_dir, name))
    return cell, summary, None


@dataclass
class ExperimentResult:
    summaries: List[RunSummary]
    errors: List[Tuple[Cell, str]] = field(default_factory=list)
    references: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    output_dir: Optional[Path] = None


def run_experiment(config: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentResult:
    """Run every (method, k, T, rep) cell and write CSVs under ``output_dir``.

    Writes ``summary.csv``, ``aggregate.csv``, ``references.csv``,
    ``errors.csv`` (only when some cell failed) and, if enabled,
    ``traces/*.csv``. Output bytes depend only on the config unless
    ``record_wall_time`` is set.
    """
    jobs = jobs or config.jobs or 1
    env = build_environment(config.environment, config.base_dir)
    out = Path(config.base_dir, config.output_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    trace_dir = None
    if config.write_traces:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)

    refs = {k: compute_reference_value(env, k, config.reference) for k in config.k}
    cells = []
    for mi, method in enumerate(config.methods):
        for k in config.k:
            for horizon in config.horizons:
                for rep in range(config.repetitions):
                    seed = derive_seed(config.master_seed, mi, k, horizon, rep)
                    cells.append(Cell(len(cells), mi, method, k, horizon, rep, seed))

    args = [
        (env, c, refs[c.k][0], refs[c.k][1], config.force, trace_dir, config.record_wall_time)
        for c in cells
    ]
    results = []
    if jobs == 1:
        for a in args:
            results.append(_run_cell(*a))
            _log_cell(results[-1], len(cells))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_run_cell, *zip(*args)):
                results.append(res)
                _log_cell(res, len(cells))
    results.sort(key=lambda r: r[0].index)

    summaries = [s for _, s, _ in results if s is not None]
    errors = [(c, e) for c, _, e in results if e is not None]
    write_summary_csv(summaries, out / "summary.csv")
    with open(out / "aggregate.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        writer.writerows(aggregate_summaries(summaries))
    with open(out / "references.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("k", "f_ref", "f_ref_stderr", "mode"))
        for k, (value, err) in refs.items():
            writer.writerow((k, fmt(value), fmt(err), config.reference))
    err_path = out / "errors.csv"
    if errors:
        with open(err_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("method", "k", "horizon", "rep", "seed", "error"))
            for c, e in errors:
                writer.writerow((c.method.label, c.k, c.horizon, c.rep, c.seed, e))
    elif err_path.exists():
        err_path.unlink()
    return ExperimentResult(summaries, errors, refs, out)


def _log_cell(result, total: int) -> None:
    cell, summary, error = result
    status = f"regret={fmt(summary.regret)}" if summary else f"FAILED {error}"
    log.info(
        "cell %d/%d %s k=%d T=%d rep=%d: %s",
        cell.index + 1, total, cell.method.label, cell.k, cell.horizon, cell.rep, status,
    )
