"""Amplification sequences ||T^(n)|| for random operators and several norm pairs.

Prints one row per (descriptor, rank, norm pair) with the ratio of each stage
to ||T||.  With the projection-family multi-norm on both sides the ratios stay
at 1; other pairs can grow with n.

    python3 scripts/amplification_sweep.py --n-max 3 --trials 3
"""
import argparse
import json

import numpy as np

from cstar_powernorms.hilbert_module import op_norm, sample_operator
from cstar_powernorms.powernorms import amplification_norm
from cstar_powernorms.search import SearchBudget

PAIRS = [("hilbert_cstar", "hilbert_cstar"), ("mu_star", "mu_star"), ("mu_star", "l2_module"),
         ("l2_module", "mu_star")]
DESCRIPTORS = [(1,), (2,), (1, 1), (2, 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--rank", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--json", help="also write rows to this file")
    args = ap.parse_args()

    budget = SearchBudget(samples=args.samples, restarts=3, local_steps=100)
    rows = []
    print(f"{'descriptor':<10} {'pair':<26} " + " ".join(f"n={n:<5}" for n in range(1, args.n_max + 1)))
    for desc in DESCRIPTORS:
        for dk, ck in PAIRS:
            seqs = []
            for t_idx in range(args.trials):
                t = sample_operator(desc, args.rank, seed=[args.seed, t_idx])
                est = amplification_norm(t, args.n_max, dk, ck, budget, seed=args.seed + t_idx)
                seqs.append(np.array(est.extras["sequence"]) / op_norm(t))
            mean = np.mean(seqs, axis=0)
            rows.append({"descriptor": list(desc), "pair": [dk, ck], "mean_ratio": mean.tolist()})
            print(f"{str(list(desc)):<10} {dk + ' -> ' + ck:<26} " + " ".join(f"{v:<7.4f}" for v in mean))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
