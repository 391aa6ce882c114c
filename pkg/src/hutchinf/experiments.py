"""Drivers shared by the CLI and the demos: renders and convergence tables."""
from __future__ import annotations

import math

import numpy as np

from .engine import gen_iterate_sets, iterate_bound_table
from .io import rasterize_points
from .maps import classify
from .metric import TailSeq, as_cloud, hausdorff
from .systems import Builtin, ExperimentConfig

CONVERGE_HEADER = ["k", "card", "h_prev", "bound", "slack", "ok", "h_ref"]


def render_image(cfg: ExperimentConfig) -> np.ndarray:
    """K^depth from singleton anchor seeds, rasterized over the configured viewport."""
    sys = cfg.system
    seeds = TailSeq.constant(sys.anchor.reshape(1, -1))
    K = gen_iterate_sets(sys, seeds, cfg.depth, cfg.prune_eps, cfg.prefix)[-1]
    return rasterize_points(K, cfg.viewport, cfg.resolution)


def on_grid(K: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """K intersected with a truncated base space (exact float membership)."""
    K = np.asarray(K, dtype=float)
    members = {tuple(p) for p in np.asarray(grid, dtype=float)}
    return as_cloud([p for p in K if tuple(p) in members], K.shape[1])


def s2_table(b: Builtin, k_max: int, prune_eps: float = 0.0, M: int | None = None,
             restrict: bool = True) -> list:
    """Generalized iterates from the built-in seed space for systems without (Q)/(P).

    There is no a-priori bound; each row reports H(K^k, K^{k-1}) and the distance
    to the known attractor.  With ``restrict`` the iterates are intersected with
    the truncated base space before measuring.
    """
    sys = b.system
    hist = gen_iterate_sets(sys, TailSeq.constant(b.seeds), k_max, prune_eps, M)
    if restrict:
        hist = [on_grid(K, b.seeds) for K in hist]
    rows = []
    for j, K in enumerate(hist, start=1):
        h_prev = hausdorff(K, hist[j - 2], sys.metric) if j > 1 else math.nan
        h_ref = hausdorff(K, b.reference, sys.metric) if b.reference is not None else math.nan
        rows.append({"k": j, "card": len(K), "h_prev": h_prev, "bound": math.nan, "slack": 0.0,
                     "ok": None, "h_ref": h_ref})
    return rows


def convergence_rows(cfg: ExperimentConfig) -> list:
    conds = classify(cfg.system)
    if {"Q", "P"} & conds:
        rows = iterate_bound_table(cfg.system, cfg.depth, cfg.prune_eps, cfg.prefix)
        for r in rows:
            r["h_ref"] = math.nan
        return rows
    if not cfg.allow_s2:
        raise ValueError(f"condition (Q)/(P) not met (have {sorted(conds)}); pass --allow-s2 for a diagnostic table")
    if "S2" not in conds:
        raise ValueError(f"condition (S2) not met (have {sorted(conds)})")
    return s2_table(cfg.builtin, cfg.depth, cfg.prune_eps, cfg.prefix,
                    restrict=cfg.builtin.notes.get("grid", "").startswith("harmonic"))


def rows_as_table(rows: list) -> list:
    return [[r[h] for h in CONVERGE_HEADER] for r in rows]


def truncation_rows(sys, m_max: int, tol: float) -> list:
    """H(A_{F_m}, A_F) for m = 1..m_max with certified errors on both clouds.

    Each row carries the analytic bound tail / (1 - L~) on the true distance,
    with tail = sup_i sum_{k >= m} |c_i r_i^k| diam(A) for affine-sum maps.
    """
    from .engine import attractor, diagonal_lipschitz, gifs_attractor, truncated_system
    from .maps import AffineSum
    from .metric import diameter

    if not all(isinstance(f, AffineSum) for f in sys.maps):
        raise ValueError("truncation study needs affine-sum maps")
    A = attractor(sys, tol, method="diagonal")
    diam = diameter(A.cloud, sys.metric) + 2.0 * A.err
    L = diagonal_lipschitz(sys)
    rows = []
    for m in range(1, m_max + 1):
        Am = gifs_attractor(truncated_system(sys, m), tol)
        tail = max(abs(f.c) * abs(f.r) ** m / (1.0 - abs(f.r)) for f in sys.maps) * diam
        rows.append({"m": m, "dist": hausdorff(Am.cloud, A.cloud, sys.metric), "err_m": Am.err,
                     "err_A": A.err, "bound": tail / (1.0 - L), "points": len(Am.cloud)})
    return rows
