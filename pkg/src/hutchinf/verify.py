"""Self-check suites behind ``hutchinf verify``.

Each suite returns a list of check records ``{"check", "ok", "value", "limit"}``;
the CLI exits nonzero when any record fails.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np

from . import cantor as cl
from .codespace import (CodePoint, code_dist, conjugacy_check, format_address, parse_address, pi,
                        random_code_point, random_code_tree, seq_code_dist, shift, slice_code,
                        slices, tile, tile_rate)
from .engine import attractor
from .metric import (EUCLIDEAN, MAXIMUM, MetricParams, TailSeq, epsnet_prune, hausdorff,
                     hausdorff_seq, seq_dist)
from .seqspace import from_tailseq, leaf, level_dist, node
from .systems import planar_system, sup_pair_system

SUITES = ("metrics", "hausdorff", "shifts", "tiles", "conjugacy", "cantor")


def _rec(name, ok, value=None, limit=None) -> dict:
    return {"check": name, "ok": bool(ok), "value": value, "limit": limit}


def random_tailseq(rng, dim=2, max_prefix=6, scale=1.0) -> TailSeq:
    n = int(rng.integers(0, max_prefix + 1))
    return TailSeq(list(rng.uniform(-scale, scale, (n, dim))), rng.uniform(-scale, scale, dim))


def suite_metrics(seed: int = 0, n: int = 200) -> list:
    rng = np.random.default_rng(seed)
    out = []
    worst_tri = worst_sym = 0.0
    for _ in range(n):
        x, y, z = (random_tailseq(rng) for _ in range(3))
        for mp in (MetricParams.sup(0.5), MetricParams.lp(2.0, 0.5)):
            dxy, dyx = seq_dist(x, y, mp), seq_dist(y, x, mp)
            worst_sym = max(worst_sym, abs(dxy - dyx))
            worst_tri = max(worst_tri, dxy - seq_dist(x, z, mp) - seq_dist(z, y, mp))
    out.append(_rec("seq_dist symmetry", worst_sym == 0.0, worst_sym, 0.0))
    out.append(_rec("seq_dist triangle", worst_tri <= 1e-12, worst_tri, 1e-12))
    worst = 0.0
    for _ in range(n):
        x, y = random_tailseq(rng), random_tailseq(rng)
        q, p = rng.uniform(0.05, 0.95), rng.uniform(1.0, 4.0)
        qq = rng.uniform(q, 1.0)
        s = seq_dist(x, y, MetricParams.sup(q))
        worst = max(worst, s - seq_dist(x, y, MetricParams.lp(p, q ** p)))
        worst = max(worst, s - seq_dist(x, y, MetricParams.sup(qq)))
        q2 = rng.uniform(q ** (1.0 / p), 1.0)
        c = (1.0 - q / q2 ** p) ** (-1.0 / p)
        worst = max(worst, seq_dist(x, y, MetricParams.lp(p, q)) - c * seq_dist(x, y, MetricParams.sup(q2)))
    out.append(_rec("metric comparison inequalities", worst <= 1e-12, worst, 1e-12))
    worst = 0.0
    for _ in range(n // 2):
        x, y = random_tailseq(rng), random_tailseq(rng)
        mp = MetricParams.lp(1.5, 0.4)
        worst = max(worst, abs(level_dist(from_tailseq(x), from_tailseq(y), mp, EUCLIDEAN) - seq_dist(x, y, mp)))
    out.append(_rec("level-1 distance matches sequence distance", worst <= 1e-12, worst, 1e-12))
    return out


def _product_cloud(Ks: TailSeq) -> list:
    """All tail sequences picking one point per coordinate; coordinates >= depth use singleton anchors."""
    return [TailSeq(list(choice), Ks.anchor[0]) for choice in itertools.product(*Ks.prefix)]


def product_hausdorff(Ks: TailSeq, Ds: TailSeq, mp: MetricParams, m=EUCLIDEAN) -> float:
    """Brute-force Hausdorff distance between product clouds under d_{s,q} / d_{p,q}."""
    M = max(Ks.depth, Ds.depth)
    Ks = TailSeq([Ks[k] for k in range(M)], Ks.anchor)
    Ds = TailSeq([Ds[k] for k in range(M)], Ds.anchor)
    P, Q = _product_cloud(Ks), _product_cloud(Ds)
    d = np.array([[seq_dist(a, b, mp, m) for b in Q] for a in P])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def suite_hausdorff(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for _ in range(20):
        A, B = rng.uniform(0, 1, (300, 2)), rng.uniform(0, 1, (200, 2))
        for m in (EUCLIDEAN, MAXIMUM):
            worst = max(worst, abs(hausdorff(A, B, m, "reference") - hausdorff(A, B, m, "kdtree")))
    out.append(_rec("kd-tree path agrees with reference", worst <= 1e-12, worst, 1e-12))
    worst = 0.0
    for _ in range(10):
        q = 0.5
        Ks = TailSeq([rng.uniform(0, 1, (2, 1)) for _ in range(3)], rng.uniform(0, 1, (1, 1)))
        Ds = TailSeq([rng.uniform(0, 1, (2, 1)) for _ in range(3)], rng.uniform(0, 1, (1, 1)))
        mp = MetricParams.sup(q)
        worst = max(worst, abs(hausdorff_seq(Ks, Ds, mp) - product_hausdorff(Ks, Ds, mp)))
    out.append(_rec("product Hausdorff equality (sup)", worst <= 1e-9, worst, 1e-9))
    h = 1.0 / 128
    grid = np.arange(0, 129)[:, None] * h
    zero = np.zeros((1, 1))
    Ks, Ds = TailSeq([grid], zero), TailSeq([zero, grid], zero)
    p, q = 2.0, 0.5
    val = hausdorff_seq(Ks, Ds, MetricParams.lp(p, q))
    out.append(_rec("lp product example (1+q)^(1/p)", abs(val - (1 + q) ** (1 / p)) <= h, val, (1 + q) ** (1 / p)))
    A = rng.uniform(0, 1, (2000, 2))
    S = epsnet_prune(A, 0.05)
    hv = hausdorff(S, A)
    out.append(_rec("epsnet contract", hv <= 0.05, hv, 0.05))
    return out


def suite_shifts(seed: int = 0, n: int = 200) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for mp, expected in ((MetricParams.sup(0.5), 0.5), (MetricParams.sup(0.3), 0.3),
                         (MetricParams.lp(1.0, 0.5), 0.25), (MetricParams.lp(2.0, 0.4), math.sqrt(0.3))):
        worst = 0.0
        for _ in range(n):
            k = int(rng.integers(0, 4))
            a = TailSeq([random_code_point(rng, 3, 3) for _ in range(k)], random_code_point(rng, 3, 3))
            b = TailSeq([random_code_point(rng, 3, 3) for _ in range(k)], random_code_point(rng, 3, 3))
            den = seq_code_dist(a, b, mp)
            j = int(rng.integers(1, 4))
            if den > 0:
                worst = max(worst, abs(code_dist(shift(j, a), shift(j, b), mp) / den - expected))
        out.append(_rec(f"shift ratio {mp.kind} q={mp.q} p={mp.p}", worst <= 1e-12, worst, 1e-12))
    bad = 0
    for _ in range(n):
        a = random_code_point(rng, 4, 3)
        sl = slices(a)
        if shift(a.entry(0).value, sl) != a:
            bad += 1
        args = TailSeq([random_code_point(rng, 3, 3) for _ in range(3)], random_code_point(rng, 3, 3))
        s = shift(2, args)
        if any(slice_code(s, i) != args[i] for i in range(5)):
            bad += 1
        alpha = tuple(random_code_tree(rng, k, 3) for k in range(3))
        if parse_address(format_address(alpha)) != alpha:
            bad += 1
    out.append(_rec("reconstruction, slice inverse, address round-trip", bad == 0, bad, 0))
    return out


def suite_tiles(seed: int = 0, A=None) -> list:
    sys = planar_system()
    A = A or attractor(sys, 0.05)
    rng = np.random.default_rng(seed)
    out = []
    worst = -math.inf
    for k in range(3):
        for _ in range(4):
            alpha = tuple(random_code_tree(rng, j, 4, 2) for j in range(k + 1))
            t = tile(sys, A, alpha, n_random=8, seed=seed)
            worst = max(worst, _diam(t.cloud) - t.diam_bound)
    out.append(_rec("tile diameter decay", worst <= 0, worst, 0.0))
    union = np.concatenate([tile(sys, A, (leaf(i),), n_random=8).cloud for i in range(1, 5)])
    hv = hausdorff(union, A.cloud, sys.metric)
    lim = 2 * A.err + tile_rate(sys) * (_diam(A.cloud) + 2 * A.err)
    out.append(_rec("depth-0 tiles cover the attractor", hv <= lim, hv, lim))
    return out


def _diam(cloud):
    from .metric import diameter
    return diameter(cloud, MAXIMUM)


def suite_conjugacy(seed: int = 0, n: int = 10, A=None) -> list:
    sys = planar_system()
    A = A or attractor(sys, 0.05)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n):
        k = int(rng.integers(0, 2))
        alpha = tuple(random_code_tree(rng, j, 4, 2) for j in range(k + 1))
        codes = _random_code_tree_of_points(rng, k + 1, 3)
        r, budget = conjugacy_check(sys, alpha, codes, 3, A)
        worst = max(worst, r - budget)
    out = [_rec("conjugacy residual within budget", worst <= 0, worst, 0.0)]
    sp = sup_pair_system()
    Asp = attractor(sp, 1e-3)
    n_idx = 5
    lvl1 = node({n_idx: leaf(2)}, leaf(1))
    witness = CodePoint([leaf(1), lvl1], 1)
    x_w, _ = pi(sp, witness, 3, Asp)
    x_lim, err = pi(sp, CodePoint((), 1), 3, Asp)
    ok = abs(float(x_w[0]) - 0.5) < 1e-15 and abs(float(x_lim[0])) <= err
    out.append(_rec("address map discontinuity witness", ok, [float(x_w[0]), float(x_lim[0])], [0.5, 0.0]))
    return out


def _random_code_tree_of_points(rng, level: int, depth: int):
    if level == 0:
        return leaf(random_code_point(rng, depth, 4))
    kids = {i: _random_code_tree_of_points(rng, level - 1, depth) for i in range(2) if rng.random() < 0.5}
    return node(kids, _random_code_tree_of_points(rng, level - 1, depth))


def suite_cantor(seed: int = 0, k_max: int = 4, n_pairs: int = 100) -> list:
    out = []
    ms = cl.minimal_fin4_sequence(k_max)
    params = cl.derive_params(0.5, 0.5, ms)
    res = params.residuals()
    worst = max([res["fin1"]] + res["fin2"])
    out.append(_rec("defining relations residual", worst <= 1e-12, worst, 1e-12))
    out.append(_rec("strict spacing inequality", max(res["fin3"]) < 0, max(res["fin3"]), 0.0))
    out.append(_rec(f"counting inequality for ms={list(ms)}", all(cl.check_fin4(ms, k_max)), k_max, k_max))
    certs = cl.certificate_sweep(ms, k_max)
    out.append(_rec("measure certificate sweep", all(c.ok for c in certs), sum(c.ok for c in certs), len(certs)))
    ratios = lipschitz_ratios(params, n_pairs, seed)
    out.append(_rec("cantor map Lipschitz ratios", max(ratios) <= params.K, max(ratios), params.K))
    return out


def random_tilde_code(rng, ms, depth: int) -> tuple:
    return tuple(int(rng.integers(cl.alphabet_size(ms, j))) for j in range(depth + 1))


def lipschitz_ratios(params, n_pairs: int, seed: int = 0, D: int = 2) -> list:
    """d(f_i(a), f_i(b)) / sup_t q^t d(a_t, b_t) over random argument pairs at depth <= D."""
    rng = np.random.default_rng(seed)
    ms, q = params.ms, params.q
    n_args = ms[D - 1]
    ratios = []
    while len(ratios) < n_pairs:
        a = [random_tilde_code(rng, ms, int(rng.integers(0, D))) for _ in range(n_args)]
        b = list(a)
        t = int(rng.integers(n_args))
        b[t] = random_tilde_code(rng, ms, int(rng.integers(0, D)))
        if rng.random() < 0.5:
            u = int(rng.integers(n_args))
            b[u] = random_tilde_code(rng, ms, int(rng.integers(0, D)))
        den = max(q ** s * np.linalg.norm(cl.point_diff(params, a[s], b[s])) for s in range(n_args))
        if den == 0:
            continue
        i = int(rng.integers(1, 5))
        fa = cl.cantor_map(i, TailSeq(a, (0,)), ms)
        fb = cl.cantor_map(i, TailSeq(b, (0,)), ms)
        ratios.append(float(np.linalg.norm(cl.point_diff(params, fa, fb)) / den))
    return ratios


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES + ("all",):
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    names = SUITES if name == "all" else (name,)
    shared = {}
    report = {"suite": name, "results": {}}
    for s in names:
        t0 = time.perf_counter()
        fn = globals()[f"suite_{s}"]
        if s in ("tiles", "conjugacy"):
            if "A" not in shared:
                shared["A"] = attractor(planar_system(), 0.05)
            checks = fn(seed=seed, A=shared["A"])
        else:
            checks = fn(seed=seed)
        report["results"][s] = {"checks": checks, "seconds": round(time.perf_counter() - t0, 3)}
    report["ok"] = all(c["ok"] for r in report["results"].values() for c in r["checks"])
    return report
