"""Four affine maps on sequences in the plane: constant, iterates, certified attractor, render.

Run: python3 demos/planar_attractor.py [--out DIR]
"""
import argparse
from pathlib import Path

from hutchinf import attractor, classify, gen_iterate_sets, invariance_residual, iterate_bound_table
from hutchinf.io import black_pixels, rasterize_points, write_points_csv, write_ppm
from hutchinf.metric import TailSeq
from hutchinf.systems import planar_system


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("demo_out/planar"))
    args = ap.parse_args()

    sys = planar_system()
    print(f"maps: x -> b_i + sum 0.1 * 4^-k x_k, b_i in {{0, 1/2}}^2; weighted-sup metric with q = {sys.mp.q}")
    print(f"system Lipschitz constant L = {sys.L} ; conditions {sorted(classify(sys))}")

    print("\ngeneralized iterates from the singleton {0}:")
    print(f"{'k':>2} {'|K^k|':>7} {'H(K^k, K^k-1)':>14} {'bound':>9} ok")
    for r in iterate_bound_table(sys, 6, 1e-3):
        print(f"{r['k']:>2} {r['card']:>7} {r['h_prev']:>14.5g} {r['bound']:>9.5g} {r['ok']}")

    A = attractor(sys, 0.02)
    print(f"\nattractor: {len(A.cloud)} points, certified error {A.err:.4g} after k = {A.meta['k']}")
    print(f"invariance residual H(F(A, A, ...), A) = {invariance_residual(sys, A, 1e-3):.4g}")
    write_points_csv(args.out / "attractor.csv", A.cloud)

    seeds = TailSeq.constant(sys.anchor.reshape(1, -1))
    for k, K in enumerate(gen_iterate_sets(sys, seeds, 4, 1e-3), start=1):
        img = rasterize_points(K, ((0.0, 0.0), (1.0, 1.0)), (512, 512))
        write_ppm(args.out / f"iterate_{k}.ppm", img)
        print(f"iterate_{k}.ppm: {black_pixels(img)} black pixels")
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
