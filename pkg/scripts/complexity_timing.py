"""Per-episode wall time of UCBVI-TS versus its rarely-switching variant as SA grows.

    python scripts/complexity_timing.py --K 500 --C 1.0
"""
import argparse

import numpy as np

from trajfb.agents import AgentConfig
from trajfb.harness import random_dense, run_cell


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=int, default=500)
    ap.add_argument("--H", type=int, default=5)
    ap.add_argument("--C", type=float, default=1.0)
    ap.add_argument("--shapes", default="5x4,10x5,20x5,25x8", help="comma-separated SxA list")
    args = ap.parse_args()

    print(f"{'SA':>5} {'agent':<10} {'median us':>10} {'mean us':>10} {'switches':>9}")
    for shape in args.shapes.split(","):
        S, A = map(int, shape.split("x"))
        env = random_dense(S, A, args.H, seed=0)
        for kind in ("UcbviTs", "RsUcbviTs"):
            recs = run_cell(env, AgentConfig(kind, C=args.C), 0, args.K, record_wall_time=True)
            wall = np.array([r.wall_time_ns for r in recs]) / 1e3
            switches = sum(r.switched for r in recs)
            print(f"{S * A:>5} {kind:<10} {np.median(wall):>10.0f} {wall.mean():>10.0f} {switches:>9}")


if __name__ == "__main__":
    main()
