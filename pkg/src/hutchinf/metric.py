"""Base metrics on R^D, weighted sequence metrics and Hausdorff distances.

Points are 1-d float arrays of length D (batched points carry leading axes).
Finite sets are 2-d arrays of shape (n, D).  Elements of l-infinity are
represented by :class:`TailSeq`: a finite prefix followed by a constant anchor
repeated forever, so every aggregate over the tail has a closed form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree


class BaseMetric(enum.Enum):
    EUCLIDEAN = "euclidean"
    MAXIMUM = "maximum"
    ABSOLUTE = "absolute-1d"
    DISCRETE = "discrete"  # symbol leaves of code trees

    @classmethod
    def parse(cls, name: str | "BaseMetric") -> "BaseMetric":
        if isinstance(name, cls):
            return name
        for member in cls:
            if member.value == name or member.name.lower() == str(name).lower():
                return member
        raise ValueError(f"unknown base metric {name!r}")


EUCLIDEAN = BaseMetric.EUCLIDEAN
MAXIMUM = BaseMetric.MAXIMUM
ABSOLUTE = BaseMetric.ABSOLUTE
DISCRETE = BaseMetric.DISCRETE


@dataclass(frozen=True)
class MetricParams:
    """Weighted sequence metric: ``sup q^k d`` (kind "sup") or ``(sum q^k d^p)^(1/p)`` (kind "lp")."""

    kind: str
    q: float
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sup", "lp"):
            raise ValueError(f"metric kind must be 'sup' or 'lp', got {self.kind!r}")
        if self.kind == "sup" and not (0.0 < self.q <= 1.0):
            raise ValueError("sup-kind metric needs q in (0, 1]")
        if self.kind == "lp":
            if not (0.0 < self.q < 1.0):
                raise ValueError("lp-kind metric needs q in (0, 1); q = 1 may give infinite distances")
            if not (self.p >= 1.0 and math.isfinite(self.p)):
                raise ValueError("lp-kind metric needs finite p >= 1")

    @classmethod
    def sup(cls, q: float) -> "MetricParams":
        return cls("sup", float(q))

    @classmethod
    def lp(cls, p: float, q: float) -> "MetricParams":
        return cls("lp", float(q), float(p))

    @property
    def is_sup(self) -> bool:
        return self.kind == "sup"

    def to_dict(self) -> dict:
        if self.is_sup:
            return {"kind": "sup", "q": self.q}
        return {"kind": "lp", "p": self.p, "q": self.q}


@dataclass(frozen=True, eq=False)
class TailSeq:
    """Sequence ``prefix[0], ..., prefix[M-1], anchor, anchor, ...``."""

    prefix: tuple
    anchor: Any

    def __init__(self, prefix: Iterable = (), anchor: Any = None):
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "anchor", anchor)

    @classmethod
    def constant(cls, anchor) -> "TailSeq":
        return cls((), anchor)

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def __getitem__(self, k: int):
        if k < 0:
            raise IndexError("TailSeq indices are nonnegative")
        return self.prefix[k] if k < len(self.prefix) else self.anchor

    def head(self, n: int) -> list:
        return [self[k] for k in range(n)]

    def prepend(self, items: Sequence) -> "TailSeq":
        """``(items[0], ..., items[-1], self[0], self[1], ...)``."""
        return TailSeq(tuple(items) + self.prefix, self.anchor)

    def map(self, fn: Callable) -> "TailSeq":
        return TailSeq(tuple(fn(v) for v in self.prefix), fn(self.anchor))

    def __repr__(self) -> str:
        return f"TailSeq(prefix={self.prefix!r}, anchor={self.anchor!r})"


def as_point(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    if not np.all(np.isfinite(a)):
        raise ValueError("points must have finite coordinates")
    return a


def base_dist(x, y, m: BaseMetric = EUCLIDEAN):
    """Distance between points (or broadcast batches of points along the last axis)."""
    if m is DISCRETE:
        return float(x != y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:]:
        raise ValueError(f"dimension mismatch: {x.shape[-1:]} vs {y.shape[-1:]}")
    diff = np.abs(x - y)
    if m is EUCLIDEAN:
        out = np.sqrt(np.sum(diff * diff, axis=-1))
    elif m is MAXIMUM:
        out = np.max(diff, axis=-1)
    elif m is ABSOLUTE:
        if x.shape[-1] != 1:
            raise ValueError("absolute-1d metric needs dimension 1")
        out = diff[..., 0]
    else:
        raise ValueError(f"unsupported base metric {m}")
    return float(out) if np.ndim(out) == 0 else out


def _first_missing(indices: Sequence[int]) -> int:
    taken = set(indices)
    c = 0
    while c in taken:
        c += 1
    return c


def weighted_aggregate(mp: MetricParams, indices: Sequence[int], values: Sequence[float],
                       rest: float, weight: float | None = None) -> float:
    """Aggregate ``values`` placed at ``indices`` with ``rest`` at every other index.

    Weights are ``w^i`` with ``w = mp.q`` unless ``weight`` is given.  The
    complement of ``indices`` is infinite, so its contribution is summed in
    closed form (sup: ``rest * w^c`` with ``c`` the first free index).
    """
    w = mp.q if weight is None else weight
    idx = np.asarray(indices, dtype=float)
    vals = np.asarray(values, dtype=float)
    if mp.is_sup:
        best = float(np.max(w ** idx * vals)) if len(vals) else 0.0
        if rest > 0.0:
            c = _first_missing(indices)
            best = max(best, rest * (w ** c if w < 1.0 else 1.0))
        return best
    p = mp.p
    if w >= 1.0:
        raise ValueError("lp-kind aggregate needs weight < 1")
    total = float(np.sum(w ** idx * vals ** p)) if len(vals) else 0.0
    if rest > 0.0:
        c = _first_missing(indices)
        comp = w ** c / (1.0 - w) - float(np.sum(w ** idx[idx > c]))
        total += rest ** p * max(comp, 0.0)
    return total ** (1.0 / p)


def seq_dist(x: TailSeq, y: TailSeq, mp: MetricParams, m: BaseMetric = EUCLIDEAN) -> float:
    """d_{s,q} or d_{p,q} between two tail sequences of points, exactly."""
    M = max(x.depth, y.depth)
    vals = [base_dist(x[k], y[k], m) for k in range(M)]
    return weighted_aggregate(mp, range(M), vals, base_dist(x.anchor, y.anchor, m))


# ---------------------------------------------------------------- finite sets

def as_cloud(points, dim: int | None = None) -> np.ndarray:
    """Validate a finite set: returns a lexicographically sorted, exactly deduplicated (n, D) array."""
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1) if dim in (None, 1) else a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError("a finite set must be a nonempty (n, D) array")
    if dim is not None and a.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("points must have finite coordinates")
    return np.unique(a, axis=0)


def _kd_p(m: BaseMetric) -> float:
    return np.inf if m is MAXIMUM else 2.0


def _directed_reference(A: np.ndarray, B: np.ndarray, m: BaseMetric, chunk: int = 2048) -> float:
    worst = 0.0
    for s in range(0, len(A), chunk):
        diff = np.abs(A[s:s + chunk, None, :] - B[None, :, :])
        if m is MAXIMUM:
            d = diff.max(axis=-1)
        else:
            d = np.sum(diff * diff, axis=-1)  # squared distances, rooted once at the end
        worst = max(worst, float(d.min(axis=1).max()))
    return worst if m is MAXIMUM else math.sqrt(worst)


def hausdorff(A, B, m: BaseMetric = EUCLIDEAN, method: str = "auto") -> float:
    """Hausdorff-Pompeiu distance between finite sets.

    ``method="reference"`` is the O(|A||B|) double sup-inf; ``"kdtree"`` uses
    nearest-neighbour queries; ``"auto"`` picks the tree for large inputs.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    if A.shape[1] != B.shape[1]:
        raise ValueError("dimension mismatch")
    if m is ABSOLUTE and A.shape[1] != 1:
        raise ValueError("absolute-1d metric needs dimension 1")
    if method == "auto":
        method = "kdtree" if len(A) * len(B) > 4_000_000 else "reference"
    if method == "reference":
        return max(_directed_reference(A, B, m), _directed_reference(B, A, m))
    if method == "kdtree":
        p = _kd_p(m)
        dab = cKDTree(B).query(A, p=p)[0].max()
        dba = cKDTree(A).query(B, p=p)[0].max()
        return float(max(dab, dba))
    raise ValueError(f"unknown method {method!r}")


def directed_hausdorff(A, B, m: BaseMetric = EUCLIDEAN) -> float:
    """sup over a in A of the distance from a to B."""
    A = np.asarray(A, dtype=float).reshape(len(A), -1)
    B = np.asarray(B, dtype=float).reshape(len(B), -1)
    return float(cKDTree(B).query(A, p=_kd_p(m))[0].max())


def hausdorff_seq(Ks: TailSeq, Ds: TailSeq, mp: MetricParams, m: BaseMetric = EUCLIDEAN) -> float:
    """H^d_{s,q} or H^d_{p,q} between tail sequences of finite sets."""
    M = max(Ks.depth, Ds.depth)
    vals = [hausdorff(Ks[k], Ds[k], m) for k in range(M)]
    return weighted_aggregate(mp, range(M), vals, hausdorff(Ks.anchor, Ds.anchor, m))


def diameter(A, m: BaseMetric = EUCLIDEAN) -> float:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if len(A) < 2:
        return 0.0
    if m is MAXIMUM or A.shape[1] == 1:
        return float(np.max(np.ptp(A, axis=0)))
    if len(A) > 1500 and A.shape[1] in (2, 3):
        from scipy.spatial import ConvexHull
        try:
            A = A[ConvexHull(A).vertices]
        except Exception:  # degenerate (collinear) clouds fall back to all pairs
            pass
    from scipy.spatial.distance import pdist
    return float(pdist(A).max())


def epsnet_prune(A, eps: float, m: BaseMetric = EUCLIDEAN) -> np.ndarray:
    """Greedy lexicographic eps-net: keep a point unless a kept point lies within eps.

    The result S is a subset of A with H(S, A) <= eps.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    A = as_cloud(A)
    if eps == 0.0 or len(A) == 1:
        return A
    tree = cKDTree(A)
    p = _kd_p(m)
    removed = np.zeros(len(A), dtype=bool)
    keep = []
    for i in range(len(A)):
        if removed[i]:
            continue
        keep.append(i)
        removed[tree.query_ball_point(A[i], eps, p=p)] = True
    return A[keep]
