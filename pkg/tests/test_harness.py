import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import SOCIAL_GRAPH, modular_env
from sgbandit.algorithms import run_sgb
from sgbandit.environments import (
    CascadeEnv,
    CoverageEnv,
    CoverageInstance,
    coverage_expected,
    load_edge_list,
    random_coverage_instance,
    save_coverage_instance,
)
from sgbandit.harness import (
    SUMMARY_COLUMNS,
    ConfigError,
    ExperimentConfig,
    aggregate_runs,
    compute_reference_value,
    cumulative_regret_series,
    derive_seed,
    estimate_clean_event_rate,
    moving_average,
    run_experiment,
    summarize_run,
    write_trace_csv,
)
from sgbandit.schedule import make_params

floats01 = st.floats(0.0, 1.0, allow_nan=False)


# ---- reference value ----------------------------------------------------------


def test_reference_hand_built_coverage():
    # arm 0 covers elements 0,1 surely; arm 1 covers 2 with 0.5; arm 2 covers 0,1,2 with 0.5
    p = np.zeros((6, 4))
    p[0, [0, 1]] = 1.0
    p[1, 2] = 0.5
    p[2, :3] = 0.5
    p[3, 3] = 0.25
    env = CoverageEnv(CoverageInstance(p))
    # greedy k=2: first arm 0 (0.5), then best gain: arm 2 adds 0.5/4=0.125, arm 1 adds 0.125,
    # tie -> arm 1; value = (1 + 1 + 0.5 + 0) / 4
    value, err = compute_reference_value(env, 2)
    assert value == pytest.approx(2.5 / 4) and err == 0.0


def test_reference_k_zero():
    env = modular_env([1, 2, 3])
    assert compute_reference_value(env, 0) == (0.0, 0.0)


def test_reference_cascade_no_spread():
    g = load_edge_list(open(SOCIAL_GRAPH))
    env = CascadeEnv(g, p=0.0, mc_reps=5)
    value, err = compute_reference_value(env, 3)
    assert value == pytest.approx(3 / g.node_count) and err == 0.0


def test_reference_optimal_mode():
    inst = random_coverage_instance(7, 4, np.random.default_rng(0))
    env = CoverageEnv(inst)
    value, _ = compute_reference_value(env, 2, mode="optimal")
    greedy, _ = compute_reference_value(env, 2)
    assert value <= greedy + 1e-12


# ---- regret series ------------------------------------------------------------


def test_regret_zero_when_matching_reference():
    assert np.allclose(cumulative_regret_series([0.3] * 5, 0.3), 0.0)


def test_regret_all_zero_rewards():
    assert cumulative_regret_series([0, 0, 0, 0], 0.5).tolist() == [0.5, 1.0, 1.5, 2.0]


def test_regret_negative_allowed():
    series = cumulative_regret_series([1.0] * 6, 0.5)
    assert np.all(np.diff(series) < 0) and series[-1] == -3.0


@given(st.lists(floats01, min_size=1, max_size=50), floats01, st.floats(-0.5, 0.5))
def test_regret_affine_in_reference(rewards, f_ref, delta):
    base = cumulative_regret_series(rewards, f_ref)
    moved = cumulative_regret_series(rewards, f_ref + delta)
    t = np.arange(1, len(rewards) + 1)
    assert np.allclose(moved, base + t * delta, atol=1e-9)


# ---- moving average ---------------------------------------------------------


def test_moving_average_window_one_identity():
    x = [0.1, 0.7, 0.3]
    assert moving_average(x, 1) == pytest.approx(x, abs=1e-12)


def test_moving_average_constant():
    assert np.allclose(moving_average([0.37] * 300, 100), 0.37)


def test_moving_average_alternating():
    out = moving_average([0, 1, 0, 1, 0, 1], 2)
    assert out.tolist() == [0.0, 0.5, 0.5, 0.5, 0.5, 0.5]


def test_moving_average_warmup_uses_prefix():
    out = moving_average([1.0, 2.0, 3.0, 4.0], 3)
    assert out.tolist() == pytest.approx([1.0, 1.5, 2.0, 3.0])


def test_moving_average_bad_window():
    with pytest.raises(ValueError):
        moving_average([1.0], 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=80), st.integers(1, 30))
def test_moving_average_within_bounds(x, w):
    out = moving_average(x, w)
    assert len(out) == len(x)
    assert out.min() >= min(x) and out.max() <= max(x)


# ---- aggregation -------------------------------------------------------------


def test_aggregate_single_run():
    mean, std = aggregate_runs([[1.0, 2.0]])
    assert mean.tolist() == [1.0, 2.0] and std.tolist() == [0.0, 0.0]


def test_aggregate_identical_runs():
    mean, std = aggregate_runs([[1.0, 2.0], [1.0, 2.0]])
    assert mean.tolist() == [1.0, 2.0] and std.tolist() == [0.0, 0.0]


def test_aggregate_two_series():
    mean, std = aggregate_runs([np.zeros(4), np.full(4, 2.0)])
    assert np.allclose(mean, 1.0) and np.allclose(std, math.sqrt(2))


def test_aggregate_mismatched_lengths():
    with pytest.raises(ValueError):
        aggregate_runs([[1.0], [1.0, 2.0]])


# ---- clean event --------------------------------------------------------------


def test_clean_event_deterministic_env():
    env = modular_env([1, 2, 3, 4, 5])
    params, _ = make_params(5, 2, 1000)
    est = estimate_clean_event_rate(env, params, 20, np.random.default_rng(0))
    assert est.frequency == 1.0


def test_clean_event_requires_exact_oracle():
    env = CascadeEnv(load_edge_list(io.StringIO("0 1\n")), 0.1)
    params, _ = make_params(2, 1, 100)
    with pytest.raises(ValueError):
        estimate_clean_event_rate(env, params, 5, np.random.default_rng(0))


def test_clean_event_with_inflated_radius():
    env = CoverageEnv(random_coverage_instance(10, 6, np.random.default_rng(3)))
    params, _ = make_params(10, 3, 2000)
    est = estimate_clean_event_rate(env, params, 100, np.random.default_rng(0), rad_scale=10.0)
    assert est.frequency == 1.0


def test_clean_event_detects_violations_with_tiny_radius():
    env = CoverageEnv(random_coverage_instance(10, 6, np.random.default_rng(3)))
    params, _ = make_params(10, 3, 2000)
    est = estimate_clean_event_rate(env, params, 50, np.random.default_rng(0), rad_scale=1e-4)
    assert est.frequency < 1.0


# ---- summaries ----------------------------------------------------------------


def test_summary_fields():
    env = CoverageEnv(random_coverage_instance(12, 5, np.random.default_rng(1)))
    trace = run_sgb(env, 2, 5000, np.random.default_rng(2))
    f_ref, _ = compute_reference_value(env, 2)
    s = summarize_run(trace, f_ref, 0.0, rep=3, seed=99)
    assert s.regret == pytest.approx(5000 * f_ref - trace.rewards.sum())
    assert s.regret_ref == pytest.approx(5000 * f_ref)
    assert s.exploration_end == trace.phase_ends[-1] <= 5000
    assert s.exploit_mean_reward == pytest.approx(trace.rewards[s.exploration_end :].mean())
    assert len(s.row()) == len(SUMMARY_COLUMNS)
    assert s.row()[-1] == ""  # wall time off by default


def test_trace_csv(tmp_path):
    env = modular_env([1, 2, 3])
    trace = run_sgb(env, 1, 40, np.random.default_rng(0), force=True)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    lines = path.read_text().split("\n")
    assert lines[0] == "t,phase,action_size,reward,cum_reward"
    assert len(lines) == 40 + 2  # header, rows, trailing newline
    assert lines[1].startswith("1,1,1,")


# ---- experiments --------------------------------------------------------------


def test_seed_derivation_stable_and_distinct():
    seeds = {derive_seed(5, 0, 2, 1000, rep) for rep in range(50)}
    assert len(seeds) == 50
    assert derive_seed(5, 1, 2, 1000, 0) == derive_seed(5, 1, 2, 1000, 0)
    assert derive_seed(5, 1, 2, 1000, 0) != derive_seed(6, 1, 2, 1000, 0)


def write_config(tmp_path, **overrides):
    inst = random_coverage_instance(12, 6, np.random.default_rng(0), p_max=0.5)
    save_coverage_instance(inst, tmp_path / "inst.cov")
    cfg = {
        "environment": {"type": "coverage", "path": "inst.cov"},
        "methods": [{"name": "sgb"}],
        "k": [2],
        "horizons": [4000],
        "repetitions": 3,
        "master_seed": 11,
        "output_dir": "out",
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_experiment_three_reps(tmp_path):
    config = ExperimentConfig.load(write_config(tmp_path))
    result = run_experiment(config)
    assert len(result.summaries) == 3
    assert len({s.seed for s in result.summaries}) == 3
    header = (tmp_path / "out" / "summary.csv").read_text().split("\n")[0]
    assert header == ",".join(SUMMARY_COLUMNS)
    assert not (tmp_path / "out" / "errors.csv").exists()


def test_run_experiment_reproducible(tmp_path):
    path = write_config(
        tmp_path,
        methods=[{"name": "sgb"}, {"name": "etcg"}, {"name": "random"},
                 {"name": "sgb-anytime", "t_initial": 1000}],
        write_traces=True,
    )
    config = ExperimentConfig.load(path)
    run_experiment(config)
    out = tmp_path / "out"
    first = {p.name: p.read_bytes() for p in out.rglob("*.csv")}
    run_experiment(ExperimentConfig.load(path), jobs=2)
    second = {p.name: p.read_bytes() for p in out.rglob("*.csv")}
    assert first == second
    assert len([n for n in first if n.startswith(("sgb_", "etcg_", "random_", "sgb-anytime_"))]) == 12


def test_failing_cell_recorded_and_sweep_continues(tmp_path):
    # T=50 fails the horizon check for sgb (no force) but random still runs
    path = write_config(tmp_path, methods=["sgb", "random"], horizons=[50], repetitions=2)
    result = run_experiment(ExperimentConfig.load(path))
    assert len(result.errors) == 2 and len(result.summaries) == 2
    assert "HorizonError" in (tmp_path / "out" / "errors.csv").read_text()


@pytest.mark.parametrize(
    "bad, message",
    [
        ({"repetitions": 0}, "repetitions"),
        ({"horizons": [5000, 4000]}, "ascending"),
        ({"methods": [{"name": "ucb"}]}, "unknown method"),
        ({"surprise": 1}, "unknown config keys"),
    ],
)
def test_config_validation(tmp_path, bad, message):
    with pytest.raises(ConfigError, match=message):
        ExperimentConfig.load(write_config(tmp_path, **bad))


def test_config_json_error_has_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "k": [1],\n  oops\n}')
    with pytest.raises(ConfigError, match=r"broken.json:3"):
        ExperimentConfig.load(path)
