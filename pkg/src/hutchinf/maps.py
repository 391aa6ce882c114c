"""Maps from l-infinity(X) to X with declared Lipschitz certificates.

Every map evaluates on a :class:`TailSeq` of points.  Points may carry leading
batch axes (shape (..., D)); all map kinds broadcast over them, which lets the
code-space compositions evaluate many samples at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metric import (EUCLIDEAN, BaseMetric, MetricParams, TailSeq, as_point,
                     base_dist, seq_dist)

DECLARED = "declared-analytic"
EMPIRICAL = "empirical-lower-bound"


@dataclass(frozen=True)
class LipCert:
    mp: MetricParams
    L: float
    provenance: str = DECLARED


class GifsMap:
    kind = "abstract"
    dim = 1
    C1 = True
    C2 = True

    def eval(self, x: TailSeq) -> np.ndarray:
        raise NotImplementedError

    def tilde(self, x) -> np.ndarray:
        """f~(x) = f(x, x, ...)."""
        return self.eval(TailSeq.constant(np.asarray(x, dtype=float)))

    def lipschitz(self, mp: MetricParams) -> float:
        """Declared Lipschitz constant under d_{s,q} / d_{p,q}; inf when unbounded."""
        raise NotImplementedError

    def tail_error(self, M: int, diam: float) -> float:
        raise NotImplementedError

    def truncate(self, m: int, anchor) -> "TruncatedMap":
        return TruncatedMap(self, m, as_point(anchor))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check(self, x: TailSeq):
        a = np.asarray(x.anchor)
        if a.shape[-1:] != (self.dim,):
            raise ValueError(f"map of dimension {self.dim} evaluated on points of shape {a.shape}")


class AffineSum(GifsMap):
    """x -> offset + sum_k c r^k x_k (scalar coefficients, vector points)."""

    kind = "affine_sum"

    def __init__(self, c: float, r: float, offset, C1: bool = True, C2: bool = True):
        if not abs(r) < 1.0:
            raise ValueError("coefficient family c*r^k diverges unless |r| < 1")
        self.c = float(c)
        self.r = float(r)
        self.offset = as_point(offset)
        self.dim = len(self.offset)
        self.C1, self.C2 = C1, C2

    def coef(self, k: int) -> float:
        return self.c * self.r ** k

    def tail_coef(self, M: int) -> float:
        """sum_{k>=M} c_k."""
        return self.c * self.r ** M / (1.0 - self.r)

    def tail_abs(self, M: int) -> float:
        """sum_{k>=M} |c_k|."""
        return abs(self.c) * abs(self.r) ** M / (1.0 - abs(self.r))

    def eval(self, x: TailSeq) -> np.ndarray:
        self._check(x)
        out = self.offset + self.tail_coef(x.depth) * np.asarray(x.anchor, dtype=float)
        for k, v in enumerate(x.prefix):
            out = out + self.coef(k) * np.asarray(v, dtype=float)
        return out

    def lipschitz(self, mp: MetricParams) -> float:
        c, r = abs(self.c), abs(self.r)
        if c == 0.0:
            return 0.0
        if mp.is_sup:
            # sum_k |c| r^k q^{-k}
            return c / (1.0 - r / mp.q) if r < mp.q else math.inf
        # Hoelder: sup over d_{p,q}-unit balls of sum |c_k| d_k
        p, q = mp.p, mp.q
        t = r * q ** (-1.0 / p)
        if p == 1.0:
            return c if r <= q else math.inf
        if t >= 1.0:
            return math.inf
        pc = p / (p - 1.0)
        return c * (1.0 - t ** pc) ** (-1.0 / pc)

    def tail_error(self, M: int, diam: float) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        return diam * self.tail_abs(M)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c, "r": self.r, "offset": self.offset.tolist(),
                "C1": self.C1, "C2": self.C2}

    def __repr__(self) -> str:
        return f"AffineSum(c={self.c}, r={self.r}, offset={self.offset.tolist()})"


class SupScale(GifsMap):
    """x -> s * sup_k x_k + b on the real line."""

    kind = "sup_scale"
    dim = 1

    def __init__(self, s: float, b: float = 0.0, C1: bool = True, C2: bool = True):
        if s < 0:
            raise ValueError("sup_scale needs s >= 0")
        self.s = float(s)
        self.b = float(b)
        self.C1, self.C2 = C1, C2

    def eval(self, x: TailSeq) -> np.ndarray:
        self._check(x)
        top = np.asarray(x.anchor, dtype=float)
        for v in x.prefix:
            top = np.maximum(top, np.asarray(v, dtype=float))
        return self.s * top + self.b

    def lipschitz(self, mp: MetricParams) -> float:
        if self.s == 0.0:
            return 0.0
        # a change far out in the sequence moves the sup by the full amount
        return self.s if (mp.is_sup and mp.q == 1.0) else math.inf

    def tail_error(self, M: int, diam: float) -> float:
        if M < 0:
            raise ValueError("M must be nonnegative")
        return self.s * diam

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s": self.s, "b": self.b, "C1": self.C1, "C2": self.C2}

    def __repr__(self) -> str:
        return f"SupScale(s={self.s}, b={self.b})"


class Constant(GifsMap):
    kind = "constant"

    def __init__(self, value, C1: bool = True, C2: bool = True):
        self.value = as_point(value)
        self.dim = len(self.value)
        self.C1, self.C2 = C1, C2

    def eval(self, x: TailSeq) -> np.ndarray:
        self._check(x)
        shape = np.asarray(x.anchor).shape
        return np.broadcast_to(self.value, shape).copy()

    def lipschitz(self, mp: MetricParams) -> float:
        return 0.0

    def tail_error(self, M: int, diam: float) -> float:
        return 0.0

    def truncate(self, m: int, anchor) -> "TruncatedMap":
        return TruncatedMap(self, m, as_point(anchor))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value.tolist(), "C1": self.C1, "C2": self.C2}

    def __repr__(self) -> str:
        return f"Constant({self.value.tolist()})"


@dataclass(frozen=True, eq=False)
class TruncatedMap:
    """f_m(x_0, ..., x_{m-1}) = f(x_0, ..., x_{m-1}, a, a, ...)."""

    base: GifsMap
    m: int
    anchor: np.ndarray

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("truncation order must be >= 1")

    def __call__(self, xs: Sequence) -> np.ndarray:
        """Evaluate on an m-tuple of points."""
        if len(xs) != self.m:
            raise ValueError(f"expected {self.m} arguments, got {len(xs)}")
        return self.base.eval(TailSeq(xs, self.anchor))


@dataclass
class GifsSystem:
    maps: list
    mp: MetricParams
    metric: BaseMetric = EUCLIDEAN
    certs: list = field(default_factory=list)
    name: str = "system"
    anchor: np.ndarray | None = None

    def __post_init__(self):
        if not self.maps:
            raise ValueError("a system needs at least one map")
        dims = {f.dim for f in self.maps}
        if len(dims) != 1:
            raise ValueError("all maps must share the dimension")
        if not self.certs:
            self.certs = [LipCert(self.mp, f.lipschitz(self.mp)) for f in self.maps]
        if any(c.mp != self.mp for c in self.certs):
            raise ValueError("all certificates must share the metric parameters")
        self.anchor = np.zeros(self.dim) if self.anchor is None else as_point(self.anchor)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def L(self) -> float:
        """System constant: max of the per-map certificates."""
        return max(c.L for c in self.certs)

    def __len__(self) -> int:
        return len(self.maps)

    def tilde_lipschitz(self) -> float:
        """Upper bound on the Lipschitz constant of f~ under d (certs with q<1 also bound q=1)."""
        if self.mp.is_sup:
            return self.L
        return self.L * (1.0 - self.mp.q) ** (-1.0 / self.mp.p)


def classify(sys: GifsSystem) -> frozenset:
    """Conditions certified by the declared constants and (C1)/(C2) flags."""
    out = set()
    L = sys.L if sys.certs else math.inf
    if not math.isfinite(L):
        return frozenset()
    mp = sys.mp
    if mp.is_sup and mp.q < 1.0 and L < 1.0:
        out.add("Q")
    if not mp.is_sup and L < (1.0 - mp.q) ** (1.0 / mp.p):
        out.add("P")
    if out:
        return frozenset(out | {"S2", "S1"})
    if mp.is_sup and mp.q == 1.0 and L < 1.0:
        if all(f.C2 for f in sys.maps):
            out |= {"S2", "S1"}
        elif all(f.C1 for f in sys.maps):
            out.add("S1")
    return frozenset(out)


def error_bound(mp: MetricParams, L: float, k: int, d0: float) -> float:
    """A-priori distance between the k-th generalized iterate and the fixed point."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if mp.is_sup:
        if not (L < 1.0 and mp.q < 1.0):
            raise ValueError("sup-kind bound needs L < 1 and q < 1")
        rate = max(L, mp.q)
        return L * rate ** (k - 1) / (1.0 - rate) * d0
    base = L ** mp.p + mp.q
    if base >= 1.0:
        raise ValueError("lp-kind bound needs L^p + q < 1")
    rate = base ** (1.0 / mp.p)
    return L * base ** ((k - 1) / mp.p) / (1.0 - rate) * d0


def gen_fixed_point(f: GifsMap, seed: TailSeq, tol: float, mp: MetricParams,
                    m: BaseMetric = EUCLIDEAN, max_iter: int = 10_000):
    """Generalized iterates x^{k+1} = f(x^k, ..., x^1, x_0, x_1, ...) until the bound drops below tol."""
    L = f.lipschitz(mp)
    if not math.isfinite(L):
        raise ValueError("map has no finite certificate under these metric parameters")
    if mp.is_sup and not (L < 1.0 and mp.q < 1.0):
        raise ValueError("need a sup-kind certificate with L < 1 and q < 1")
    if not mp.is_sup and not L < (1.0 - mp.q) ** (1.0 / mp.p):
        raise ValueError("need an lp-kind certificate with L < (1-q)^(1/p)")
    history = []
    x = f.eval(seed)
    history.append(x)
    d0 = seq_dist(seed, seed.prepend([x]), mp, m)
    k = 1
    bound = error_bound(mp, L, k, d0) if L > 0 else 0.0
    while bound > tol and k < max_iter:
        x = f.eval(seed.prepend(history[::-1]))
        history.append(x)
        k += 1
        bound = error_bound(mp, L, k, d0)
    return x, bound


def truncate(f: GifsMap, m: int, anchor) -> TruncatedMap:
    return f.truncate(m, anchor)


def tail_error(f: GifsMap, M: int, diam: float) -> float:
    return f.tail_error(M, diam)


def eval_map(f: GifsMap, x: TailSeq) -> np.ndarray:
    return f.eval(x)


def tilde_eval(f: GifsMap, x) -> np.ndarray:
    return f.tilde(x)


def empirical_lipschitz(f: GifsMap, pairs: Sequence, mp: MetricParams, m: BaseMetric = EUCLIDEAN) -> float:
    """Largest observed ratio d(f(x), f(y)) / seq_dist(x, y): a lower bound on the true constant."""
    best = 0.0
    for x, y in pairs:
        den = seq_dist(x, y, mp, m)
        if den > 0:
            best = max(best, base_dist(f.eval(x), f.eval(y), m) / den)
    return best
