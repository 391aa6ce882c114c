"""A Cantor set in the unit square that is the attractor of maps with infinitely many arguments
but of no system with finitely many.

Run: python3 demos/cantor_set.py [--out DIR]
"""
import argparse
import math
from pathlib import Path

from hutchinf import cantor as cl
from hutchinf.engine import attractor
from hutchinf.io import rasterize_squares, write_json, write_ppm
from hutchinf.metric import hausdorff


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("demo_out/cantor"))
    args = ap.parse_args()

    ms = cl.minimal_fin4_sequence(4)
    params = cl.derive_params(0.5, 0.5, ms)
    print(f"greedy argument counts m_k = {ms}")
    for k in range(params.depth + 1):
        print(f"  k={k}: side p_k = {params.p(k):.4e}, gap a_k = {params.a(k):.4e}, "
              f"grid {cl.grid_side(ms, k)}^2 children")
    res = params.residuals()
    print(f"relation residuals: {res['fin1']:.1e}, max {max(res['fin2']):.1e}; spacing ratios {res['fin3']}")

    print("\nmeasure certificates (order-m images cover less than 4^-k of C):")
    for c in cl.certificate_sweep(ms, 4):
        print(f"  m={c.m} k={c.k}: 4^{c.r_k_exponent} / 4^{c.tile_exponent} < 4^-{c.k}: {c.ok}")
    print(f"counting inequality with ms = (1, 1, 1): {cl.check_fin4((1, 1, 1), 2)}")

    for sub, D in (((1, 1, 1, 1), 3), (ms, 2)):
        p = cl.derive_params(0.5, 0.5, sub)
        A = attractor(cl.cantor_system(p, D), 1e-3)
        h = hausdorff(A.cloud, cl.depth_centers(p, D))
        print(f"\nms={sub}, depth {D}: engine attractor has {len(A.cloud)} points, "
              f"H to square centers {h:.3g} <= sqrt(2) p_D = {math.sqrt(2) * p.p(D):.3g}")

    p = cl.derive_params(0.5, 0.5, (1, 1, 1, 1))
    for k in range(4):
        img = rasterize_squares(cl.square_array(p, k), ((0.0, 0.0), (1.0, 1.0)), (512, 512))
        write_ppm(args.out / f"squares_depth{k}.ppm", img)
    write_json(args.out / "certificates.json", [c.to_dict() for c in cl.certificate_sweep(ms, 4)])
    print(f"\nrenders and certificates in {args.out}")


if __name__ == "__main__":
    main()
