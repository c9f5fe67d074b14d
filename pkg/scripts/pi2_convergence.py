"""How the pi2 lower bound approaches its target as the search grows.

Commutative algebras: the target is the frame value.  Noncommutative ones:
the operator norm, which the certified normalization cannot exceed.  Rows are
(budget samples, tuple length cap) against the mean ratio estimate / target.

    python3 scripts/pi2_convergence.py --trials 5
"""
import argparse

import numpy as np

from cstar_powernorms.hilbert_module import op_norm, sample_operator
from cstar_powernorms.search import SearchBudget
from cstar_powernorms.summing import pi2_estimate, pi2_frame

DESCRIPTORS = [(1,), (1, 1), (1, 1, 1), (2,), (2, 1)]


def target(t):
    if t.descriptor.commutative():
        return pi2_frame(t).value
    return op_norm(t)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--rank", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    caps = [1, 2, 4, 8, None]
    samples = [100, 1000, 5000]
    print("descriptor  samples  " + "  ".join(f"n<={c if c else 'def':<4}" for c in caps))
    for desc in DESCRIPTORS:
        ops = [sample_operator(desc, args.rank, seed=[args.seed, i]) for i in range(args.trials)]
        goals = [target(t) for t in ops]
        for s in samples:
            budget = SearchBudget(samples=s)
            ratios = []
            for cap in caps:
                vals = [pi2_estimate(t, cap, budget, args.seed).value / g for t, g in zip(ops, goals)]
                ratios.append(np.mean(vals))
            print(f"{str(list(desc)):<11} {s:<8} " + "  ".join(f"{r:<7.4f}" for r in ratios))


if __name__ == "__main__":
    main()
