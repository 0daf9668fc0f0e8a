"""Fit the log-log growth rate of cumulative regret against the horizon.

Runs SGB (optimal eps) on a random coverage instance over a grid of
horizons and prints the mean regret per horizon and the fitted slope.
A slope near 2/3 matches the T^(2/3) polylog rate; near 1 means linear
regret.

    python scripts/regret_exponent.py --arms 50 --k 5 --horizons 20000 40000 80000 160000
"""

import argparse

import numpy as np

from sgbandit.algorithms import run_etcg, run_sgb
from sgbandit.environments import CoverageEnv, random_coverage_instance
from sgbandit.harness import compute_reference_value, derive_seed


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--arms", type=int, default=50)
    parser.add_argument("--universe", type=int, default=30)
    parser.add_argument("--p-max", type=float, default=0.5)
    parser.add_argument("--density", type=float, default=0.3)
    parser.add_argument("--instance-seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--horizons", type=int, nargs="+", default=[20_000, 40_000, 80_000, 160_000])
    parser.add_argument("--repetitions", type=int, default=10)
    parser.add_argument("--master-seed", type=int, default=0)
    parser.add_argument("--etcg", action="store_true", help="also fit ETCG (forced) for comparison")
    args = parser.parse_args()

    inst = random_coverage_instance(
        args.arms, args.universe, np.random.default_rng(args.instance_seed), args.p_max, args.density
    )
    env = CoverageEnv(inst)
    f_ref, _ = compute_reference_value(env, args.k)
    runners = {"sgb": lambda T, rng: run_sgb(env, args.k, T, rng)}
    if args.etcg:
        runners["etcg"] = lambda T, rng: run_etcg(env, args.k, T, rng, force=True)

    print(f"f(S_grd) = {f_ref:.6f}")
    for mi, (name, run) in enumerate(runners.items()):
        means = []
        for T in args.horizons:
            regrets = [
                T * f_ref - run(T, np.random.default_rng(derive_seed(args.master_seed, mi, args.k, T, r))).rewards.sum()
                for r in range(args.repetitions)
            ]
            means.append(float(np.mean(regrets)))
            print(f"{name:<6} T={T:<8} mean regret {means[-1]:10.1f}  std {np.std(regrets, ddof=1):8.1f}")
        if min(means) > 0:
            slope = np.polyfit(np.log(args.horizons), np.log(means), 1)[0]
            print(f"{name:<6} log-log slope {slope:.3f}")
        else:
            print(f"{name:<6} non-positive mean regret; slope undefined")


if __name__ == "__main__":
    main()
