"""``hutchinf`` command line: render, converge, verify, cantor, attractor."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from . import cantor as cl
from .engine import ResourceError, attractor
from .experiments import CONVERGE_HEADER, convergence_rows, render_image, rows_as_table
from .io import (atomic_write, black_pixels, csv_bytes, json_bytes, rasterize_squares, write_csv, write_json,
                 write_points_csv, write_ppm)
from .maps import classify
from .systems import BUILTINS, ExperimentConfig, builtin, load_config
from .verify import SUITES, run_suite


def _floats(s: str) -> tuple:
    return tuple(float(v) for v in s.split(","))


def _ints(s: str) -> tuple:
    return tuple(int(v) for v in s.split(","))


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON experiment config (schema hutchinf/1)")
    p.add_argument("--system", choices=BUILTINS, help="built-in system (default ex5)")
    p.add_argument("--depth", type=int, help="iteration depth k")
    p.add_argument("--prune", type=float, help="eps-net pruning radius")
    p.add_argument("--prefix", type=int, help="number of leading sets summed exactly (M)")
    p.add_argument("--tol", type=float, help="target Hausdorff error")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", type=Path, help="output path")


def _config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        if args.system:
            cfg.builtin = builtin(args.system)
    else:
        b = builtin(args.system or "ex5")
        cfg = ExperimentConfig(b, viewport=b.viewport)
    for flag, attr in (("depth", "depth"), ("prune", "prune_eps"), ("prefix", "prefix"),
                       ("tol", "tol"), ("seed", "seed")):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "allow_s2", False):
        cfg.allow_s2 = True
    if getattr(args, "resolution", None):
        cfg.resolution = (args.resolution, args.resolution)
    if getattr(args, "viewport", None):
        v = args.viewport
        half = len(v) // 2
        if len(v) % 2 or any(lo >= hi for lo, hi in zip(v[:half], v[half:])):
            raise ValueError("--viewport takes min coordinates then max coordinates, with min < max")
        cfg.viewport = (v[:half], v[half:])
    if cfg.depth < 1:
        raise ValueError("--depth must be >= 1")
    return cfg


def _out_path(args, cfg, key: str, default: str) -> Path:
    if args.out is not None:
        return args.out
    return Path(cfg.paths.get(key, default))


def cmd_render(args) -> int:
    cfg = _config(args)
    img = render_image(cfg)
    path = write_ppm(_out_path(args, cfg, "image", "render.ppm"), img)
    print(json.dumps({"image": str(path), "black_pixels": black_pixels(img), "depth": cfg.depth}))
    return 0


def cmd_converge(args) -> int:
    cfg = _config(args)
    rows = convergence_rows(cfg)
    table = csv_bytes(CONVERGE_HEADER, rows_as_table(rows))
    path = atomic_write(_out_path(args, cfg, "table", "converge.csv"), table)
    sys.stdout.write(table.decode("utf-8"))
    failed = [r["k"] for r in rows if r["ok"] is False]
    print(json.dumps({"table": str(path), "conditions": sorted(classify(cfg.system)), "failed_k": failed}))
    return 1 if failed else 0


def cmd_attractor(args) -> int:
    cfg = _config(args)
    A = attractor(cfg.system, cfg.tol, args.prune)
    path = write_points_csv(_out_path(args, cfg, "cloud", "attractor.csv"), A.cloud)
    print(json.dumps({"cloud": str(path), "points": len(A.cloud), "err": A.err, "meta": A.meta},
                     default=str, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed or 0)
    if args.out is not None:
        write_json(args.out, report)
    sys.stdout.write(json_bytes(report).decode("utf-8"))
    return 0 if report["ok"] else 1


def cmd_cantor(args) -> int:
    if args.auto_ms is not None:
        ms = cl.minimal_fin4_sequence(args.auto_ms)
        k_max = args.auto_ms
    elif args.ms is not None:
        ms = args.ms
        k_max = len(ms) - 1
    else:
        raise ValueError("give --ms or --auto-ms")
    if k_max < 1:
        raise ValueError("the certificate needs at least two entries of ms")
    params = cl.derive_params(args.K, args.q, ms)
    depth = args.depth
    if not 0 <= depth <= params.depth:
        raise ValueError(f"--depth must lie in 0..{params.depth}")
    out = args.out or Path("cantor_out")
    sq = cl.square_array(params, depth)
    codes = cl.tilde_addresses(ms, depth)
    rows = [["[" + ",".join(str(s + 1) for s in code) + "]", x, y, s] for code, (x, y, s) in zip(codes, sq)]
    write_csv(out / "squares.csv", ["address", "x", "y", "side"], rows)
    img = rasterize_squares(sq, ((0.0, 0.0), (1.0, 1.0)), (args.resolution, args.resolution))
    write_ppm(out / "squares.ppm", img)
    fin4 = cl.check_fin4(ms, k_max)
    certs = cl.certificate_sweep(ms, k_max)
    ok = all(fin4) and all(c.ok for c in certs)
    report = {
        "K": args.K, "q": args.q, "ms": list(ms), "verified_k_max": k_max,
        "fin4": fin4, "failing_k": [k for k, good in enumerate(fin4, start=1) if not good],
        "certificates": [c.to_dict() for c in certs], "residuals": params.residuals(), "ok": ok,
    }
    write_json(out / "certificate.json", report)
    print(json.dumps({"out": str(out), "squares": len(sq), "ok": ok, "failing_k": report["failing_k"]}))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hutchinf", description="Attractors of maps on sequence spaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="rasterize the depth-k generalized iterate as PPM")
    _add_common(p)
    p.add_argument("--resolution", type=int, help="pixels per axis")
    p.add_argument("--viewport", type=_floats, help="xmin,ymin,xmax,ymax (xmin,xmax in 1-d)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("converge", help="tabulate measured H(K^k, K^{k-1}) against the a-priori bound")
    _add_common(p)
    p.add_argument("--allow-s2", action="store_true", help="tabulate systems with (S2) but no (Q)/(P)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("attractor", help="certified attractor cloud as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("verify", help="run invariant suites; exit 0 iff all pass")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="also write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cantor", help="square hierarchy, render and measure certificate")
    p.add_argument("--K", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.5)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ms", type=_ints, help="comma-separated nondecreasing m_0,m_1,...")
    g.add_argument("--auto-ms", type=int, metavar="KMAX", help="greedy minimal sequence up to KMAX")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out", type=Path, help="output directory")
    p.set_defaults(func=cmd_cantor)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except jsonschema.ValidationError as exc:
        print(f"hutchinf {args.command}: invalid config: {exc.message}", file=sys.stderr)
        return 2
    except (ValueError, OSError, ArithmeticError, ResourceError) as exc:
        print(f"hutchinf {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
