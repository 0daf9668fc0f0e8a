"""Command-line front end: ``sgbandit {validate,run,sweep,offline,diagnose}``.

Exit codes: 0 success, 1 runtime/config failure, 2 usage error.
Environment overrides: ``SGB_OUTPUT_DIR`` (sweep output directory) and
``SGB_JOBS`` (sweep parallelism); explicit flags win over both.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import time
from typing import List, Optional

import numpy as np

from .algorithms import (
    BudgetExceededError,
    brute_force_opt,
    offline_greedy,
    offline_stochastic_greedy,
)
from .environments import ParseError
from .harness import (
    METHODS,
    SUMMARY_COLUMNS,
    ConfigError,
    ExperimentConfig,
    MethodSpec,
    compute_reference_value,
    environment_from_path,
    estimate_clean_event_rate,
    run_experiment,
    run_method,
    summarize_run,
    write_trace_csv,
)
from .schedule import ScheduleError, compute_sample_size, make_params, validate_horizon


def _add_env_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", required=True, help="coverage instance file or edge-list file")
    p.add_argument("--p", type=float, default=0.1, help="cascade infection probability (graphs)")
    p.add_argument(
        "--mc-reps", type=int, default=200, help="Monte Carlo cascades per oracle call (graphs)"
    )
    p.add_argument("--oracle-seed", type=int, default=0, help="seed of the Monte Carlo oracle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgbandit", description="Stochastic-greedy combinatorial bandit experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a horizon and print the derived schedule")
    p.add_argument("--n", type=int, required=True, help="number of base arms")
    p.add_argument("--k", type=int, required=True, help="cardinality constraint")
    p.add_argument("--horizon", type=int, required=True, help="time horizon T")
    p.add_argument("--epsilon", type=float, help="override the optimal epsilon")

    p = sub.add_parser("run", help="execute one online run and print its summary")
    _add_env_flags(p)
    p.add_argument("--method", choices=METHODS, required=True, help="learner to run")
    p.add_argument("--epsilon", type=float, help="epsilon override (sgb, sgb-anytime)")
    p.add_argument("--k", type=int, required=True, help="cardinality constraint")
    p.add_argument("--horizon", type=int, required=True, help="time horizon T")
    p.add_argument("--seed", type=int, default=0, help="seed of the run's random stream")
    p.add_argument("--t-initial", type=int, help="first window length (sgb-anytime)")
    p.add_argument("--reference", choices=("greedy", "optimal"), default="greedy",
                   help="regret reference value")
    p.add_argument("--force", action="store_true", help="run even if the horizon check fails")
    p.add_argument("--trace-out", help="write the per-step trace CSV here")
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")

    p = sub.add_parser("sweep", help="run an experiment config (JSON)")
    p.add_argument("--config", required=True, help="path to the JSON experiment config")
    p.add_argument("--jobs", type=int, help="parallel worker processes (default: CPU count)")
    p.add_argument("--output-dir", help="override the config's output directory")

    p = sub.add_parser("offline", help="run an offline oracle on the expected-value function")
    _add_env_flags(p)
    p.add_argument("--k", type=int, required=True, help="cardinality constraint")
    p.add_argument("--algo", choices=("greedy", "stochastic-greedy", "brute"), default="greedy",
                   help="offline algorithm")
    p.add_argument("--epsilon", type=float, default=0.2, help="stochastic-greedy epsilon")
    p.add_argument("--seed", type=int, default=0, help="seed for stochastic-greedy sampling")

    p = sub.add_parser("diagnose", help="diagnostics")
    dsub = p.add_subparsers(dest="diagnostic", required=True)
    d = dsub.add_parser("clean-event", help="empirical frequency of the clean event")
    d.add_argument("--env", required=True, help="coverage instance file (exact oracle)")
    d.add_argument("--k", type=int, required=True, help="cardinality constraint")
    d.add_argument("--horizon", type=int, required=True, help="time horizon T")
    d.add_argument("--reps", type=int, default=500, help="number of exploration runs")
    d.add_argument("--seed", type=int, default=0, help="seed of the random stream")
    d.add_argument("--epsilon", type=float, help="epsilon override")
    d.add_argument("--rad-scale", type=float, default=1.0, help="multiply the radius")
    return parser


def _env(args):
    return environment_from_path(args.env, p=args.p, mc_reps=args.mc_reps, oracle_seed=args.oracle_seed)


def cmd_validate(args, out) -> int:
    report = validate_horizon(args.n, args.k, args.horizon)
    params, warnings = make_params(args.n, args.k, args.horizon, args.epsilon)
    verdict = "valid" if report.valid else "invalid"
    print(f"n={args.n} k={args.k} T={args.horizon}: {verdict}", file=out)
    print(f"  T >= n(k+1)sqrt(ln T): {args.horizon} vs {report.required:.1f} "
          f"({'ok' if report.bound_ok else 'fails'})", file=out)
    print(f"  exploration budget m*sum(s_i): {report.exploration_length} "
          f"({'ok' if report.budget_ok else 'exceeds T'})", file=out)
    print(f"  m={params.m}", file=out)
    print(f"  epsilon*={params.epsilon:.6g}", file=out)
    print(f"  beta={params.beta:.6g}", file=out)
    print(f"  s_1={compute_sample_size(args.n, 1, params.beta)}", file=out)
    print(f"  rad={params.rad:.6g}", file=out)
    print(f"  exploration_length={params.exploration_length}", file=out)
    for w in warnings:
        print(f"  warning: {w}", file=out)
    return 0


def cmd_run(args, out) -> int:
    env = _env(args)
    spec = MethodSpec(args.method, args.epsilon, args.t_initial)
    f_ref, f_err = compute_reference_value(env, args.k, args.reference)
    start = time.perf_counter()
    trace = run_method(env, spec, args.k, args.horizon, np.random.default_rng(args.seed), args.force)
    wall = (time.perf_counter() - start) * 1000.0 if args.timing else None
    summary = summarize_run(trace, f_ref, f_err, 0, args.seed, wall)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    writer.writerow(summary.row())
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.trace_out:
        write_trace_csv(trace, args.trace_out)
    return 0


def cmd_sweep(args, out) -> int:
    config = ExperimentConfig.load(args.config)
    output_dir = args.output_dir or os.environ.get("SGB_OUTPUT_DIR")
    if output_dir:
        config.output_dir = os.path.abspath(output_dir)
    jobs = args.jobs or int(os.environ.get("SGB_JOBS", 0)) or os.cpu_count() or 1
    result = run_experiment(config, jobs=jobs)
    print(f"{len(result.summaries)} runs written to {result.output_dir}", file=out)
    if result.errors:
        print(f"{len(result.errors)} cells failed; see errors.csv", file=out)
        return 1
    return 0


def cmd_offline(args, out) -> int:
    env = _env(args)
    n = env.arm_count
    if args.algo == "greedy":
        res = offline_greedy(env.expected, n, args.k)
    elif args.algo == "stochastic-greedy":
        res = offline_stochastic_greedy(
            env.expected, n, args.k, args.epsilon, np.random.default_rng(args.seed)
        )
    else:
        res = brute_force_opt(env.expected, n, args.k)
    _, err = env.expected_with_error(res.selected_set)
    print(f"algo={args.algo} k={args.k} value={res.value:.9g} stderr={err:.3g} "
          f"evaluations={res.evaluations}", file=out)
    print("selected=" + " ".join(str(a) for a in res.selected_set), file=out)
    return 0


def cmd_diagnose(args, out) -> int:
    env = environment_from_path(args.env)
    params, _ = make_params(env.arm_count, args.k, args.horizon, args.epsilon)
    est = estimate_clean_event_rate(
        env, params, args.reps, np.random.default_rng(args.seed), args.rad_scale
    )
    print(f"clean_event_frequency={est.frequency:.9g} ({est.clean_runs}/{est.runs})", file=out)
    print(f"bound_1_minus_2_over_T={est.bound:.9g}", file=out)
    print(f"binomial_stderr={est.stderr:.3g} rad={params.rad * args.rad_scale:.6g}", file=out)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "offline": cmd_offline,
    "diagnose": cmd_diagnose,
}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, ParseError, ScheduleError, BudgetExceededError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
