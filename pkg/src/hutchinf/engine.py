"""Set-valued Hutchinson operator and attractor approximation.

Products of sets are never built.  Affine maps use Minkowski accumulation of
the scaled sets; with ``prune_eps > 0`` every partial sum lives on an integer
grid, so sums of large clouds become convolutions of occupancy arrays.  The
sup rule for ``sup_scale`` maps is exact.  Every approximation returns the
Hausdorff slack it introduced so callers can certify their error bounds.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve

from .maps import (AffineSum, Constant, GifsSystem, SupScale, classify,
                   error_bound)
from .metric import (EUCLIDEAN, BaseMetric, TailSeq,
                     as_cloud, base_dist, hausdorff, hausdorff_seq)

MAX_POINTS = 4_000_000
MAX_GRID_CELLS = 60_000_000


class ResourceError(RuntimeError):
    """Raised when an iteration would exceed the point or grid budget."""


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HUTCHINF_THREADS", "1")))
    except ValueError:
        return 1


def _rho(metric: BaseMetric, dim: int) -> float:
    """Distance moved by a grid snap of step h, in units of h/2."""
    return math.sqrt(dim) if metric is EUCLIDEAN else 1.0


def sumset(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minkowski sum of two sets of integer grid indices, shape (n, D)."""
    if len(a) == 1:
        return a[0] + b
    if len(b) == 1:
        return a + b[0]
    if len(a) * len(b) <= 2_000_000:
        s = (a[:, None, :] + b[None, :, :]).reshape(-1, a.shape[1])
        return np.unique(s, axis=0)
    lo_a, lo_b = a.min(axis=0), b.min(axis=0)
    sa = a.max(axis=0) - lo_a + 1
    sb = b.max(axis=0) - lo_b + 1
    if np.prod(sa + sb - 1, dtype=float) > MAX_GRID_CELLS:
        raise ResourceError("Minkowski sum grid too large; increase prune_eps")
    ia = np.zeros(sa, dtype=float)
    ia[tuple((a - lo_a).T)] = 1.0
    ib = np.zeros(sb, dtype=float)
    ib[tuple((b - lo_b).T)] = 1.0
    occupied = fftconvolve(ia, ib) > 0.5
    return np.argwhere(occupied) + lo_a + lo_b


def _radius(K: np.ndarray, ref: np.ndarray, metric: BaseMetric) -> float:
    return float(np.max(base_dist(K, ref, metric))) if len(K) > 1 else float(base_dist(K[0], ref, metric))


@dataclass
class _Plan:
    M: int
    radii: list
    ref: np.ndarray


def _tail_radius(plan: _Plan, M: int) -> float:
    return max(plan.radii[M:]) if M < len(plan.radii) else plan.radii[-1]


def _plan(sys: GifsSystem, Ks: TailSeq, prune_eps: float, M: int | None) -> _Plan:
    ref = np.asarray(Ks.anchor[0], dtype=float)
    radii = [_radius(K, ref, sys.metric) for K in Ks.prefix] + [_radius(Ks.anchor, ref, sys.metric)]
    plan = _Plan(M or 0, radii, ref)
    if M is not None:
        if M < 1:
            raise ValueError("prefix depth M must be >= 1")
        return plan
    affine = [f for f in sys.maps if isinstance(f, AffineSum)]
    if not affine:
        plan.M = max(Ks.depth, 1)
        return plan
    budget = max(prune_eps / 4.0, 1e-15)
    for m in range(1, 65):
        if max(f.tail_abs(m) for f in affine) * _tail_radius(plan, m) <= budget:
            plan.M = m
            return plan
    plan.M = 64
    return plan


def affine_part(c: float, r: float, Ks: TailSeq, plan: _Plan, prune_eps: float,
                metric: BaseMetric, dim: int):
    """sum_k c r^k K_k without the offset, as (cloud, slack)."""
    M = plan.M
    fam = AffineSum(c, r, np.zeros(dim))
    shift = fam.tail_coef(M) * plan.ref
    slack = fam.tail_abs(M) * _tail_radius(plan, M)
    stages = [Ks[k] for k in range(M)]
    n_big = sum(len(K) > 1 for K in stages)
    if prune_eps == 0.0 or n_big == 0:
        S = np.zeros((1, dim))
        for k, K in enumerate(stages):
            if len(K) == 1:
                shift = shift + fam.coef(k) * K[0]
                continue
            S = (S[:, None, :] + (fam.coef(k) * K)[None, :, :]).reshape(-1, dim)
            if len(S) > MAX_POINTS:
                raise ResourceError("exact Minkowski sum too large; use prune_eps > 0")
            S = np.unique(S, axis=0)
        return as_cloud(S + shift), slack
    rho = _rho(metric, dim)
    h = prune_eps / (2.0 * rho * n_big)
    g = prune_eps / (2.0 * rho)
    idx = np.zeros((1, dim), dtype=np.int64)
    for k, K in enumerate(stages):
        if len(K) == 1:
            shift = shift + fam.coef(k) * K[0]
            continue
        q = np.unique(np.rint(fam.coef(k) * K / h).astype(np.int64), axis=0)
        idx = sumset(idx, q)
        slack += rho * h / 2.0
    snapped = np.unique(np.rint(idx * (h / g)).astype(np.int64), axis=0)
    slack += rho * g / 2.0
    return snapped * g + shift, slack


def sup_image(f: SupScale, Ks: TailSeq) -> np.ndarray:
    """Exact image of prod K_k under x -> s sup x_k + b (1-d).

    A value v is an achievable sup iff it lies in some K_i and every K_j has an
    element <= v.  The anchor set stands for its infinitely many copies.
    """
    sets = [np.asarray(K, dtype=float).ravel() for K in list(Ks.prefix) + [Ks.anchor]]
    floor = max(float(s.min()) for s in sets)
    vals = np.unique(np.concatenate(sets))
    return (f.s * vals[vals >= floor] + f.b).reshape(-1, 1)


def _map_images(sys: GifsSystem, Ks: TailSeq, prune_eps: float, plan: _Plan):
    groups: dict = {}
    out = []
    for f in sys.maps:
        if isinstance(f, AffineSum):
            groups.setdefault((f.c, f.r), []).append(f)
    dim = sys.dim

    def run(key):
        return key, affine_part(key[0], key[1], Ks, plan, prune_eps, sys.metric, dim)

    keys = list(groups)
    if thread_count() > 1 and len(keys) > 1:
        with ThreadPoolExecutor(thread_count()) as ex:
            parts = dict(ex.map(run, keys))
    else:
        parts = dict(map(run, keys))
    for f in sys.maps:
        if isinstance(f, AffineSum):
            cloud, s = parts[(f.c, f.r)]
            out.append((cloud + f.offset, s))
        elif isinstance(f, SupScale):
            out.append((sup_image(f, Ks), 0.0))
        elif isinstance(f, Constant):
            out.append((f.value.reshape(1, -1), 0.0))
        elif hasattr(f, "image"):
            out.append(f.image(Ks, plan.M, prune_eps, sys.metric))
        else:
            raise TypeError(f"unsupported map kind {getattr(f, 'kind', type(f).__name__)}")
    return out


def _as_setseq(Ks, dim: int) -> TailSeq:
    if not isinstance(Ks, TailSeq):
        Ks = TailSeq.constant(Ks)
    return TailSeq([as_cloud(K, dim) for K in Ks.prefix], as_cloud(Ks.anchor, dim))


def hutchinson(sys: GifsSystem, Ks, prune_eps: float = 0.0, M: int | None = None,
               return_slack: bool = False):
    """F(K_0, K_1, ...) = union over maps of f_i(prod K_k).

    ``M`` is the number of leading sets entering the Minkowski sums exactly;
    later sets collapse to one point with their spread charged as slack.  With
    ``return_slack`` the Hausdorff slack of the computed cloud is returned too.
    """
    if prune_eps < 0:
        raise ValueError("prune_eps must be nonnegative")
    Ks = _as_setseq(Ks, sys.dim)
    plan = _plan(sys, Ks, prune_eps, M)
    images = _map_images(sys, Ks, prune_eps, plan)
    cloud = np.unique(np.concatenate([c for c, _ in images]), axis=0)
    slack = max(s for _, s in images)
    return (cloud, slack) if return_slack else cloud


def _iterates(sys, Ks, k, prune_eps, M):
    Ks = _as_setseq(Ks, sys.dim)
    history, slacks = [], []
    for _ in range(k):
        K, s = hutchinson(sys, Ks.prepend(history[::-1]), prune_eps, M, return_slack=True)
        history.append(K)
        slacks.append(s)
    return history, slacks


def gen_iterate_sets(sys: GifsSystem, Ks, k: int, prune_eps: float = 0.0, M: int | None = None) -> list:
    """Generalized set iterates K^{j+1} = F(K^j, ..., K^1, K_0, K_1, ...), j < k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _iterates(sys, Ks, k, prune_eps, M)[0]


def secelean_iterate(sys: GifsSystem, Ks, k: int, prune_eps: float = 0.0, M: int | None = None,
                     return_slack: bool = False):
    """Y_k = F(F~^k(K_0), F~^k(K_1), ...) with F~(K) = F(K, K, ...)."""
    if "S1" not in classify(sys):
        raise ValueError("condition (S1) not met")
    Ks = _as_setseq(Ks, sys.dim)
    L = sys.tilde_lipschitz()
    cache: dict = {}

    def diag(K):
        key = K.tobytes()
        if key not in cache:
            err = 0.0
            for _ in range(k):
                K, s = hutchinson(sys, TailSeq.constant(K), prune_eps, M, return_slack=True)
                err = s + L * err
            cache[key] = (K, err)
        return cache[key]

    pre = [diag(K) for K in Ks.prefix]
    anc = diag(Ks.anchor)
    Y, s = hutchinson(sys, TailSeq([K for K, _ in pre], anc[0]), prune_eps, M, return_slack=True)
    err = s + L * max([e for _, e in pre] + [anc[1]])
    return (Y, err) if return_slack else Y


def iterate_bound_table(sys: GifsSystem, k_max: int, prune_eps: float = 0.0, M: int | None = None,
                        seed=None) -> list:
    """Rows (k, |K^k|, H(K^k, K^{k-1}), bound, ok) for singleton-seed generalized iterates."""
    conds = classify(sys)
    if not ({"Q", "P"} & conds):
        raise ValueError("condition (Q)/(P) not met")
    a = sys.anchor if seed is None else np.asarray(seed, dtype=float)
    Ks = TailSeq.constant(a.reshape(1, -1))
    hist, slacks = _iterates(sys, Ks, k_max, prune_eps, M)
    L, mp = sys.L, sys.mp
    amp = _amplification(sys)
    d0 = hausdorff(hist[0], Ks.anchor, sys.metric) + slacks[0]
    rows = []
    for j, K in enumerate(hist, start=1):
        bound = error_bound(mp, L, j, d0)
        if j == 1:
            h_prev, ok = float("nan"), None
        else:
            h_prev = hausdorff(K, hist[j - 2], sys.metric)
            ok = bool(h_prev <= bound + 2.0 * amp * max(slacks[:j]) + 1e-12)
        rows.append({"k": j, "card": len(K), "h_prev": h_prev, "bound": bound,
                     "slack": amp * max(slacks[:j]), "ok": ok})
    return rows


def _amplification(sys: GifsSystem) -> float:
    """Factor turning a per-step slack into a bound on the accumulated deviation."""
    mp, L = sys.mp, sys.L
    if mp.is_sup:
        return 1.0 / (1.0 - L)
    return 1.0 / (1.0 - L * (1.0 - mp.q) ** (-1.0 / mp.p))


@dataclass
class AttractorApprox:
    cloud: np.ndarray
    err: float
    meta: dict = field(default_factory=dict)


def attractor(sys: GifsSystem, tol: float, prune_eps: float | None = None, M: int | None = None,
              method: str = "auto", max_k: int = 60) -> AttractorApprox:
    """Finite cloud within a certified Hausdorff distance ``err <= tol`` of the attractor.

    ``method="generalized"`` runs generalized iterates from the singleton seed
    and needs (Q) or (P); ``"diagonal"`` iterates F~ and needs (S1) with a
    finite constant; ``"auto"`` prefers the former.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    conds = classify(sys)
    if method == "auto":
        method = "generalized" if {"Q", "P"} & conds else "diagonal"
    if method == "generalized" and not ({"Q", "P"} & conds):
        raise ValueError("condition (Q)/(P) not met")
    if method == "diagonal" and "S1" not in conds:
        raise ValueError("condition (S1) not met")
    if all(isinstance(f, Constant) for f in sys.maps):
        cloud = as_cloud(np.stack([f.value for f in sys.maps]))
        return AttractorApprox(cloud, 0.0, {"method": "constant", "k": 1, "prune_eps": 0.0, "M": 1})
    if method == "diagonal":
        return _diagonal_attractor(sys, tol, prune_eps, M, max_k)
    L = sys.L
    amp = _amplification(sys)
    if prune_eps is None:
        prune_eps = tol / (4.0 * amp)
    Ks = TailSeq.constant(sys.anchor.reshape(1, -1))
    history, slacks = [], []
    K, s = hutchinson(sys, Ks, prune_eps, M, return_slack=True)
    history.append(K)
    slacks.append(s)
    d0 = hausdorff_seq(Ks, Ks.prepend([K]), sys.mp, sys.metric) + s
    k = 1
    while True:
        bound = error_bound(sys.mp, L, k, d0)
        err = bound + amp * max(slacks)
        if err <= tol:
            break
        if k >= max_k:
            raise ResourceError(f"tol={tol} unreachable within {max_k} iterations (err={err:.3g})")
        K, s = hutchinson(sys, Ks.prepend(history[::-1]), prune_eps, M, return_slack=True)
        history.append(K)
        slacks.append(s)
        k += 1
    meta = {"method": "generalized", "k": k, "prune_eps": prune_eps, "M": M, "bound": bound,
            "slack": amp * max(slacks), "d0": d0}
    return AttractorApprox(history[-1], err, meta)


def diagonal_lipschitz(sys: GifsSystem, m: int | None = None) -> float:
    """Lipschitz constant of K -> F(K, K, ...) (or of the order-m truncation) under H."""
    out = 0.0
    for f in sys.maps:
        if isinstance(f, AffineSum):
            head = 1.0 if m is None else 1.0 - abs(f.r) ** m
            out = max(out, abs(f.c) * head / (1.0 - abs(f.r)))
        elif isinstance(f, SupScale):
            out = max(out, f.s)
        elif isinstance(f, Constant):
            continue
        else:
            out = max(out, sys.tilde_lipschitz())
    return out


def _diagonal_fixed_set(step, L: float, seed: np.ndarray, tol: float, max_k: int, metric: BaseMetric):
    """Banach iteration of a set contraction with a-posteriori error control."""
    if not L < 1.0:
        raise ValueError("diagonal operator is not a contraction")
    K = seed
    for k in range(1, max_k + 1):
        K_new, s = step(K)
        gap = hausdorff(K_new, K, metric)
        # H(A, K_new) <= L (gap + s) / (1 - L) + s
        err = L * (gap + s) / (1.0 - L) + s
        K = K_new
        if err <= tol:
            return K, err, k
    raise ResourceError(f"tol={tol} unreachable within {max_k} diagonal iterations (err={err:.3g})")


def _diagonal_attractor(sys, tol, prune_eps, M, max_k):
    L = diagonal_lipschitz(sys)
    if prune_eps is None:
        prune_eps = tol * (1.0 - L) / 4.0
    step = lambda K: hutchinson(sys, TailSeq.constant(K), prune_eps, M, return_slack=True)
    K, err, k = _diagonal_fixed_set(step, L, sys.anchor.reshape(1, -1), tol, max_k, sys.metric)
    return AttractorApprox(K, err, {"method": "diagonal", "k": k, "prune_eps": prune_eps, "M": M})


# ------------------------------------------------------------ order-m systems

@dataclass
class OrderMGifs:
    """F_m = {f_1^m, ..., f_n^m}, each f_i^m(x_0..x_{m-1}) = f_i(x_0..x_{m-1}, a, a, ...)."""

    base: GifsSystem
    m: int
    anchor: np.ndarray

    @property
    def maps(self) -> list:
        return [f.truncate(self.m, self.anchor) for f in self.base.maps]

    def apply(self, sets: Sequence, prune_eps: float = 0.0, return_slack: bool = False):
        if len(sets) != self.m:
            raise ValueError(f"order-{self.m} system needs {self.m} sets")
        seq = TailSeq([as_cloud(K, self.base.dim) for K in sets], self.anchor.reshape(1, -1))
        return hutchinson(self.base, seq, prune_eps, self.m, return_slack=return_slack)


def truncated_system(sys: GifsSystem, m: int, anchor=None) -> OrderMGifs:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not ({"Q", "P"} & classify(sys)):
        raise ValueError("condition (Q)/(P) not met")
    a = sys.anchor if anchor is None else np.asarray(anchor, dtype=float).reshape(-1)
    return OrderMGifs(sys, m, a)


def gifs_iterate(gifs: OrderMGifs, seeds: Sequence, k: int, prune_eps: float = 0.0) -> np.ndarray:
    """K_{j+m} = F(K_j, ..., K_{j+m-1}); returns K_{k+m}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    window = [as_cloud(K, gifs.base.dim) for K in seeds]
    if len(window) != gifs.m:
        raise ValueError(f"need {gifs.m} seed sets")
    for _ in range(k + 1):
        window = window[1:] + [gifs.apply(window, prune_eps)]
    return window[-1]


def gifs_attractor(gifs: OrderMGifs, tol: float, prune_eps: float | None = None,
                   max_k: int = 80) -> AttractorApprox:
    """Attractor of an order-m system via K -> F_m(K, ..., K), a Banach contraction on sets."""
    L = diagonal_lipschitz(gifs.base, gifs.m)
    if prune_eps is None:
        prune_eps = tol * (1.0 - L) / 4.0
    step = lambda K: gifs.apply([K] * gifs.m, prune_eps, return_slack=True)
    K, err, k = _diagonal_fixed_set(step, L, gifs.anchor.reshape(1, -1), tol, max_k, gifs.base.metric)
    return AttractorApprox(K, err, {"method": "diagonal", "m": gifs.m, "k": k, "prune_eps": prune_eps})


def invariance_residual(sys: GifsSystem, A: AttractorApprox, prune_eps: float | None = None) -> float:
    """H(F(A, A, ...), A) for a computed cloud; at most 2 err plus the operator slack."""
    if prune_eps is None:
        prune_eps = A.meta.get("prune_eps") or 0.0
    img = hutchinson(sys, TailSeq.constant(A.cloud), prune_eps)
    return hausdorff(img, A.cloud, sys.metric)
