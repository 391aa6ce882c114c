"""Order-m truncations of the planar system and how fast their attractors approach the full one.

The planar attractor is the square of the one-dimensional factor attractor
under the max metric, so the Hausdorff distances are measured on the factor.

Run: python3 demos/truncation.py [--tol 1e-5]   (about 30 s at the default)
"""
import argparse

import numpy as np

from hutchinf.experiments import truncation_rows
from hutchinf.systems import planar_factor_system


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tol", type=float, default=1e-5)
    ap.add_argument("--m-max", type=int, default=6)
    args = ap.parse_args()

    rows = truncation_rows(planar_factor_system(), args.m_max, args.tol)
    print(f"{'m':>2} {'points':>7} {'H(A_m, A)':>11} {'err':>9} {'bound':>11} {'4^m H':>8}")
    for r in rows:
        print(f"{r['m']:>2} {r['points']:>7} {r['dist']:>11.5g} {r['err_m'] + r['err_A']:>9.2g} "
              f"{r['bound']:>11.5g} {r['dist'] * 4 ** r['m']:>8.4f}")
    m = np.array([r["m"] for r in rows], dtype=float)
    d = np.array([r["dist"] for r in rows])
    print(f"fitted C in H ~ C 4^-m: {np.exp(np.mean(np.log(d) + m * np.log(4))):.4f} (analytic 15/169 = {15 / 169:.4f})")


if __name__ == "__main__":
    main()
