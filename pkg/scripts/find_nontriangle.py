"""Search M_2 for pairs violating |a + b| <= |a| + |b|, then check the unitary fix.

The plain inequality holds for commuting pairs but fails in general.  This
script samples structured and random pairs, reports the most negative margin
lambda_min(|a| + |b| - |a + b|), and confirms that the unitary construction
still dominates |a + b| for every sampled pair.  The canonical pair printed at
the end (a = e11, b = e12) is the one frozen into the test suite.

    python3 scripts/find_nontriangle.py --samples 20000 --seed 0
"""
import argparse

import numpy as np

from cstar_powernorms.algebra import AlgebraDescriptor, AlgebraElement, ginibre
from cstar_powernorms.summing import plain_triangle_margin, triangle_decomposition, triangle_margin


def rank_one(rng):
    u, v = ginibre(2, rng), ginibre(2, rng)
    return np.outer(u / np.linalg.norm(u), (v / np.linalg.norm(v)).conj())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    desc = AlgebraDescriptor((2,))
    rng = np.random.default_rng(args.seed)
    worst, worst_pair, unitary_worst = np.inf, None, np.inf
    for s in range(args.samples):
        if s % 2:
            x, y = rank_one(rng), rank_one(rng)
        else:
            x, y = ginibre((2, 2), rng), ginibre((2, 2), rng)
        a, b = AlgebraElement(desc, [x]), AlgebraElement(desc, [y])
        m = plain_triangle_margin(a, b)
        if m < worst:
            worst, worst_pair = m, (x, y)
        u, v = triangle_decomposition(a, b)
        unitary_worst = min(unitary_worst, triangle_margin(a, b, u, v))
    print(f"sampled pairs              : {args.samples}")
    print(f"most negative plain margin : {worst:.6f}")
    print(f"  a = {np.array2string(worst_pair[0], precision=3)}")
    print(f"  b = {np.array2string(worst_pair[1], precision=3)}")
    print(f"worst unitary margin       : {unitary_worst:.3e}")

    a = AlgebraElement(desc, [np.array([[1, 0], [0, 0]], dtype=complex)])
    b = AlgebraElement(desc, [np.array([[0, 1], [0, 0]], dtype=complex)])
    u, v = triangle_decomposition(a, b)
    print("canonical pair a = e11, b = e12")
    print(f"  plain margin   : {plain_triangle_margin(a, b):.12f}  (1 - sqrt 2 = {1 - np.sqrt(2):.12f})")
    print(f"  unitary margin : {triangle_margin(a, b, u, v):.12f}")


if __name__ == "__main__":
    main()
