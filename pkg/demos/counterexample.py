"""{x -> sup x_k / 2, x -> 1}: generalized iterates stall while diagonal iterates converge.

The space is {1/j : j <= 64} with 0.  Only a q = 1 certificate exists, so the
system satisfies (S2) but not (Q), and the address map is discontinuous.

Run: python3 demos/counterexample.py
"""
from fractions import Fraction

from hutchinf import attractor, classify
from hutchinf.codespace import CodePoint, constant_code, pi
from hutchinf.engine import gen_iterate_sets, secelean_iterate
from hutchinf.experiments import on_grid
from hutchinf.metric import ABSOLUTE, hausdorff
from hutchinf.seqspace import leaf, node
from hutchinf.systems import dyadic_set, harmonic_grid, sup_pair_system


def main():
    sys = sup_pair_system()
    X, A_F = harmonic_grid(64), dyadic_set(60)
    print(f"conditions: {sorted(classify(sys))}")

    print("\ngeneralized iterates restricted to the grid:")
    for k, K in enumerate(gen_iterate_sets(sys, X, 6), start=1):
        K = on_grid(K, X)
        print(f"k={k}: {len(K)} points, H(K^k, A_F) = {hausdorff(K, A_F, ABSOLUTE):.6f}")
    B = {Fraction(0), Fraction(1)} | {Fraction(1, 2 * j) for j in range(1, 33)}
    dy = {Fraction(0)} | {Fraction(1, 2 ** n) for n in range(61)}
    worst = max(min(abs(b - a) for a in dy) for b in B)
    print(f"exact: the stationary set sits at distance {worst} from A_F (attained at 1/6)")

    print("\ndiagonal route Y_k = F(F~^k(X), F~^k(X), ...):")
    for k in (2, 4, 6):
        Y = secelean_iterate(sys, X, k)
        print(f"k={k}: H(Y_k, A_F) = {hausdorff(Y, A_F, ABSOLUTE):.3g}  (bound {2 ** -k + 1 / 64:.3g})")

    A = attractor(sys, 1e-3)
    lim, err = pi(sys, constant_code(1), 3, A)
    print(f"\naddress map: pi(1, 1, 1, ...) = {lim[0]:.3g} +- {err:.2g}")
    for n in (1, 10, 100):
        a = CodePoint([leaf(1), node({n: leaf(2)}, leaf(1))], 1)
        x, _ = pi(sys, a, 3, A)
        print(f"  code with a single 2 at index {n:>3} (distance 2^-{n + 1} from the ones code): pi = {x[0]}")


if __name__ == "__main__":
    main()
