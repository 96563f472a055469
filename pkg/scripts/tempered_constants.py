"""Ablation: scale the Thompson noise and the transition bonus down and watch regret turn sublinear.

The theoretical exploration constants are conservative enough that on a small
chain they swamp the reward signal for tens of thousands of episodes.  This
script sweeps multipliers on both (1.0 reproduces the defaults) and reports,
per setting, final regret relative to UniformRandom and the growth ratio
R(K) / R(K/4), which is 4 for linear regret and 2 for sqrt(K) regret.

    python scripts/tempered_constants.py --K 4000 --seeds 3
"""
import argparse

import numpy as np

from trajfb.agents import AgentConfig
from trajfb.harness import chain, run_cell


def growth_and_final(env, cfg, seeds, K):
    finals, growth = [], []
    for s in seeds:
        recs = run_cell(env, cfg, s, K)
        finals.append(recs[-1].cum_regret)
        growth.append(recs[-1].cum_regret / max(recs[K // 4 - 1].cum_regret, 1e-12))
    return float(np.mean(finals)), float(np.mean(growth))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=int, default=4000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--noise", type=float, nargs="+", default=[1.0, 0.1, 0.02])
    ap.add_argument("--bonus", type=float, nargs="+", default=[1.0, 0.05])
    args = ap.parse_args()

    env = chain(5, 5)
    seeds = range(args.seeds)
    base, _ = growth_and_final(env, AgentConfig("UniformRandom"), seeds, args.K)
    print(f"UniformRandom final regret {base:.1f}")
    print(f"{'agent':<10} {'noise':>6} {'bonus':>6} {'regret/unif':>12} {'R(K)/R(K/4)':>12}")
    for noise in args.noise:
        final, growth = growth_and_final(env, AgentConfig("TsKnown", noise_mult=noise), seeds, args.K)
        print(f"{'TsKnown':<10} {noise:>6g} {'-':>6} {final / base:>12.3f} {growth:>12.2f}")
        for bonus in args.bonus:
            for kind in ("UcbviTs", "RsUcbviTs"):
                cfg = AgentConfig(kind, noise_mult=noise, bonus_mult=bonus)
                final, growth = growth_and_final(env, cfg, seeds, args.K)
                print(f"{kind:<10} {noise:>6g} {bonus:>6g} {final / base:>12.3f} {growth:>12.2f}")


if __name__ == "__main__":
    main()
