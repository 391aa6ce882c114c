"""Nested sequence hierarchy X_0 = X, X_{k+1} = prod X_k.

A level-k element is stored as an eventually-default tree: finitely many
explicit children plus one default child that stands for every other index.
Leaves are hashable payloads (tuples of floats for points, ints for symbols),
so trees compare and hash structurally.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .metric import (DISCRETE, BaseMetric, MetricParams, TailSeq, base_dist,
                     diameter, weighted_aggregate)

MAX_LEVEL = 6


def _payload(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (tuple, list, np.ndarray)) or np.ndim(v) > 0:
        return tuple(float(c) for c in np.asarray(v, dtype=float).ravel())
    if isinstance(v, (float, np.floating)):
        return (float(v),)
    return v


@dataclass(frozen=True)
class NestedSeq:
    level: int
    value: Any = None
    children: tuple = ()
    default: "NestedSeq | None" = None

    def __post_init__(self):
        if self.level > MAX_LEVEL:
            raise ValueError(f"nesting level {self.level} exceeds the cap {MAX_LEVEL}")

    def __hash__(self):  # cached: trees are hashed repeatedly by memoized recursions
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.level, self.value, self.children, self.default))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def is_leaf(self) -> bool:
        return self.level == 0

    def child(self, i: int) -> "NestedSeq":
        if self.level == 0:
            raise ValueError("a leaf has no children")
        for j, c in self.children:
            if j == i:
                return c
        return self.default

    @property
    def explicit(self) -> tuple:
        return tuple(j for j, _ in self.children)

    @property
    def width(self) -> int:
        """One past the largest explicit child index (0 for fully-default nodes)."""
        return self.children[-1][0] + 1 if self.children else 0

    def leaf_value(self) -> np.ndarray:
        return np.asarray(self.value, dtype=float)

    def leaves(self) -> set:
        if self.level == 0:
            return {self.value}
        out = set(self.default.leaves())
        for _, c in self.children:
            out |= c.leaves()
        return out

    def map_leaves(self, fn: Callable) -> "NestedSeq":
        if self.level == 0:
            return leaf(fn(self.value))
        return node({j: c.map_leaves(fn) for j, c in self.children}, self.default.map_leaves(fn))

    def __repr__(self) -> str:
        if self.level == 0:
            return f"leaf({self.value!r})"
        inner = ", ".join(f"{j}: {c!r}" for j, c in self.children)
        return f"node({{{inner}}}, default={self.default!r})"


def leaf(v) -> NestedSeq:
    return NestedSeq(0, _payload(v))


def node(children: Mapping[int, NestedSeq] | Sequence[NestedSeq], default: NestedSeq) -> NestedSeq:
    """Canonical level-(k+1) tree: explicit children equal to the default are dropped."""
    if not isinstance(children, Mapping):
        children = dict(enumerate(children))
    lvl = default.level
    kept = []
    for j in sorted(children):
        c = children[j]
        if j < 0:
            raise ValueError("child indices are nonnegative")
        if c.level != lvl:
            raise ValueError(f"child {j} has level {c.level}, expected {lvl}")
        if c != default:
            kept.append((int(j), c))
    return NestedSeq(lvl + 1, None, tuple(kept), default)


def constant(v, level: int) -> NestedSeq:
    t = leaf(v)
    for _ in range(level):
        t = NestedSeq(t.level + 1, None, (), t)
    return t


def from_tailseq(x: TailSeq) -> NestedSeq:
    """Level-1 tree holding the points of x."""
    return node({i: leaf(v) for i, v in enumerate(x.prefix)}, leaf(x.anchor))


def to_tailseq(x: NestedSeq, convert: Callable | None = None) -> TailSeq:
    """Level-1 tree (or any level >= 1, giving its children) as a TailSeq."""
    conv = convert or (lambda c: c)
    return TailSeq([conv(x.child(i)) for i in range(x.width)], conv(x.default))


def from_array(arr, level: int, default=None) -> NestedSeq:
    """Tree whose explicit region is the nested list/array ``arr`` (depth = level)."""
    if level == 0:
        return leaf(arr)
    dflt = constant(default, level - 1) if default is not None else None
    kids = [from_array(a, level - 1, default) for a in arr]
    if dflt is None:
        dflt = kids[-1]
    return node(dict(enumerate(kids)), dflt)


def project(x: NestedSeq, ix: Sequence[int]):
    """Coefficient x^{(i_0,...,i_j)}: a subtree, or the leaf payload at full depth."""
    if len(ix) == 0:
        raise ValueError("multi-index must be nonempty")
    if len(ix) > x.level:
        raise ValueError(f"index path of length {len(ix)} is longer than level {x.level}")
    t = x
    for i in ix:
        t = t.child(int(i))
    return t.value if t.level == 0 else t


def _leaf_dist(m: BaseMetric):
    if m is DISCRETE:
        return lambda a, b: 0.0 if a == b else 1.0
    return lambda a, b: base_dist(np.asarray(a, dtype=float), np.asarray(b, dtype=float), m)


def level_dist(x: NestedSeq, y: NestedSeq, mp: MetricParams, m: BaseMetric) -> float:
    """d_{k,s,q} / d_{k,p,q}: weighted aggregate over all multi-indices, exactly.

    Computed recursively as (d_{k-1})_{s,q} or (d_{k-1})_{p,q} over the children;
    indices outside both explicit supports share the default-vs-default value.
    """
    if x.level != y.level:
        raise ValueError("level mismatch")
    if not mp.is_sup and mp.q >= 1.0:
        raise ValueError("lp-kind level metric needs q < 1")
    dleaf = _leaf_dist(m)

    @lru_cache(maxsize=None)
    def rec(a: NestedSeq, b: NestedSeq) -> float:
        if a == b:
            return 0.0
        if a.level == 0:
            return dleaf(a.value, b.value)
        idx = sorted(set(a.explicit) | set(b.explicit))
        vals = [rec(a.child(i), b.child(i)) for i in idx]
        return weighted_aggregate(mp, idx, vals, rec(a.default, b.default))

    return rec(x, y)


def diam_level(D, k: int, mp: MetricParams, m: BaseMetric) -> float:
    """Diameter of the k-fold product hierarchy D_k over the finite set D."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    d = diameter(D, m)
    if mp.is_sup:
        return d
    return d * (1.0 - mp.q) ** (-k / mp.p)


def diagonal_embed(x: TailSeq, k: int) -> NestedSeq:
    """x_1 = x, x_{j+1} = (x_j, x_j, ...)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t = from_tailseq(x)
    for _ in range(k - 1):
        t = NestedSeq(t.level + 1, None, (), t)
    return t


def iter_indices(x: NestedSeq, bound: int) -> Iterable[tuple]:
    """All multi-indices of length x.level with coordinate sum <= bound (test oracle helper)."""
    def rec(prefix, remaining, depth):
        if depth == 0:
            yield prefix
            return
        for i in range(remaining + 1):
            yield from rec(prefix + (i,), remaining - i, depth - 1)
    yield from rec((), bound, x.level)
