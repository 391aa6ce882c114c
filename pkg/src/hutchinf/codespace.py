"""Hierarchical code space, shifts, address compositions, tiles and the address map.

A code point is a sequence of symbol trees, entry k at level k.  Beyond the
explicit entries every tree is the fully-default tree over ``default``.  An
address of depth k is a tuple of k+1 trees, one per level.  Symbols are 1-based,
matching the map numbering f_1, ..., f_n.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .engine import AttractorApprox, attractor
from .maps import GifsSystem
from .metric import DISCRETE, MetricParams, TailSeq, base_dist, diameter, weighted_aggregate
from .seqspace import NestedSeq, constant, leaf, level_dist, node, to_tailseq

Address = tuple


@dataclass(frozen=True)
class CodePoint:
    entries: tuple
    default: int

    def __init__(self, entries: Sequence[NestedSeq] = (), default: int = 1):
        entries = list(entries)
        for k, t in enumerate(entries):
            if t.level != k:
                raise ValueError(f"entry {k} has level {t.level}")
        while entries and entries[-1] == constant(default, len(entries) - 1):
            entries.pop()
        object.__setattr__(self, "entries", tuple(entries))
        object.__setattr__(self, "default", int(default))

    @property
    def depth(self) -> int:
        """Number of explicit entries."""
        return len(self.entries)

    def entry(self, k: int) -> NestedSeq:
        return self.entries[k] if k < len(self.entries) else constant(self.default, k)

    def head(self, k: int) -> Address:
        """The address a|_k = (a_0, ..., a_k)."""
        return tuple(self.entry(j) for j in range(k + 1))

    def __repr__(self) -> str:
        return f"CodePoint({format_address(self.entries) if self.entries else '[]'}, default={self.default})"


def constant_code(s: int) -> CodePoint:
    return CodePoint((), s)


def _level_weight_sum(mp: MetricParams, k: int) -> float:
    return (1.0 - mp.q) ** (-k)


def code_dist(a: CodePoint, b: CodePoint, mp: MetricParams) -> float:
    """d_{(s,q)} = sup q^k d_{k,s,q}(a_k, b_k); d_{(p,q)} = (sum ((1-q)/2)^k d_{k,p,q}^p)^(1/p)."""
    M = max(a.depth, b.depth)
    vals = [level_dist(a.entry(k), b.entry(k), mp, DISCRETE) for k in range(M)]
    delta = 0.0 if a.default == b.default else 1.0
    if mp.is_sup:
        return weighted_aggregate(mp, range(M), vals, delta)
    # default tails: d_{k,p,q}^p = delta (1-q)^{-k}, weighted by ((1-q)/2)^k -> delta 2^{-k}
    w = (1.0 - mp.q) / 2.0
    total = sum(w ** k * v ** mp.p for k, v in enumerate(vals)) + delta * 2.0 ** (1 - M)
    return total ** (1.0 / mp.p)


def seq_code_dist(xs: TailSeq, ys: TailSeq, mp: MetricParams) -> float:
    """(d_code)_{s,q} or (d_code)_{p,q} between tail sequences of code points."""
    M = max(xs.depth, ys.depth)
    vals = [code_dist(xs[i], ys[i], mp) for i in range(M)]
    return weighted_aggregate(mp, range(M), vals, code_dist(xs.anchor, ys.anchor, mp))


def shift(j: int, args: TailSeq) -> CodePoint:
    """tau_j(a_0, a_1, ...) = (j, (a_0^(0), a_1^(0), ...), (a_0^(1), a_1^(1), ...), ...)."""
    codes = list(args.prefix) + [args.anchor]
    defaults = {c.default for c in codes}
    if len(defaults) != 1:
        raise ValueError("shift arguments must share the default symbol")
    d = defaults.pop()
    depth = max(c.depth for c in codes)
    entries = [leaf(int(j))]
    for k in range(depth):
        entries.append(node({i: c.entry(k) for i, c in enumerate(args.prefix)}, args.anchor.entry(k)))
    return CodePoint(entries, d)


def slice_code(a: CodePoint, i: int) -> CodePoint:
    """a(i) = (a_1^(i), a_2^(i), ...)."""
    if i < 0:
        raise ValueError("slice index must be nonnegative")
    return CodePoint([a.entry(k).child(i) for k in range(1, a.depth)], a.default)


def slices(a: CodePoint) -> TailSeq:
    """(a(0), a(1), ...) as a tail sequence; the anchor is the default slice."""
    width = max([a.entry(k).width for k in range(1, a.depth)], default=0)
    anchor = CodePoint([a.entry(k).default for k in range(1, a.depth)], a.default)
    return TailSeq([slice_code(a, i) for i in range(width)], anchor)


def sub_address(alpha: Address, i: int | None) -> Address:
    """alpha(i) = (alpha_1^(i), ..., alpha_k^(i)); ``None`` selects the default slice."""
    if i is None:
        return tuple(t.default for t in alpha[1:])
    return tuple(t.child(i) for t in alpha[1:])


def check_address(alpha: Address) -> Address:
    alpha = tuple(alpha)
    if not alpha:
        raise ValueError("address must be nonempty")
    for k, t in enumerate(alpha):
        if t.level != k:
            raise ValueError(f"address entry {k} has level {t.level}")
    return alpha


class Diag:
    """Diagonal embedding of a batch of points into any level: every child is itself."""

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.explicit = ()
        self.width = 0

    def child(self, i):
        return self

    @property
    def default(self):
        return self


def _leaf_arg(x):
    if isinstance(x, Diag):
        return x.points
    return x.value if not isinstance(x.value, tuple) else np.asarray(x.value, dtype=float)


def compose(alpha: Address, x, apply: Callable) -> object:
    """Generic f_alpha(x) = f_{alpha_0}(f_{alpha(0)}(x_0), f_{alpha(1)}(x_1), ...).

    ``apply(symbol, TailSeq)`` evaluates a base map; ``x`` is a tree one level
    deeper than the address depth, or a :class:`Diag` batch.
    """
    cache: dict = {}

    def rec(al: Address, xx):
        key = (al, id(xx) if isinstance(xx, Diag) else xx)
        if key in cache:
            return cache[key]
        sym = al[0].value
        if len(al) == 1:
            if isinstance(xx, Diag):
                args = TailSeq.constant(xx.points)
            else:
                args = to_tailseq(xx, _leaf_arg)
        else:
            idx = set(xx.explicit)
            for t in al[1:]:
                idx |= set(t.explicit)
            width = max(idx) + 1 if idx else 0
            args = TailSeq([rec(sub_address(al, i), xx.child(i)) for i in range(width)],
                           rec(sub_address(al, None), xx.default))
        out = apply(sym, args)
        cache[key] = out
        return out

    alpha = check_address(alpha)
    if not isinstance(x, Diag) and x.level != len(alpha):
        raise ValueError(f"argument level {x.level} != address depth + 1 = {len(alpha)}")
    return rec(alpha, x)


def compose_address(sys: GifsSystem, alpha: Address, x) -> np.ndarray:
    """f_alpha applied to a point tree (or to the diagonal embedding of a point batch)."""
    n = len(sys.maps)

    def apply(sym, args):
        if not 1 <= sym <= n:
            raise ValueError(f"symbol {sym} outside 1..{n}")
        return sys.maps[sym - 1].eval(args)

    return compose(alpha, x, apply)


def compose_shift(alpha: Address, beta) -> CodePoint:
    """tau_alpha(beta) for a tree of code points one level deeper than alpha."""
    return compose(alpha, beta, shift)


# ------------------------------------------------------------------ tiles & pi

@dataclass
class Tile:
    address: Address
    cloud: np.ndarray
    diam_bound: float
    slack: float


def tile_rate(sys: GifsSystem) -> float:
    """Per-level contraction of tile diameters under the system's metric."""
    if sys.mp.is_sup:
        return sys.L
    return sys.L * (1.0 - sys.mp.q) ** (-1.0 / sys.mp.p)


def random_point_tree(rng: np.random.Generator, cloud: np.ndarray, level: int, width: int = 3) -> NestedSeq:
    if level == 0:
        return leaf(cloud[rng.integers(len(cloud))])
    kids = {i: random_point_tree(rng, cloud, level - 1, width) for i in range(width) if rng.random() < 0.6}
    return node(kids, random_point_tree(rng, cloud, level - 1, width))


def tile(sys: GifsSystem, A: AttractorApprox, alpha: Address, n_random: int = 32, seed: int = 0,
         sample: np.ndarray | None = None) -> Tile:
    """Sampled tile f_alpha(A_{k+1}): diagonal trees over the cloud plus random explicit trees."""
    alpha = check_address(alpha)
    k = len(alpha) - 1
    base = A.cloud if sample is None else sample
    pts = [np.atleast_2d(compose_address(sys, alpha, Diag(base)))]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        x = random_point_tree(rng, A.cloud, k + 1)
        pts.append(np.atleast_2d(compose_address(sys, alpha, x)))
    rate = tile_rate(sys) ** (k + 1)
    cloud = np.unique(np.concatenate(pts), axis=0)
    return Tile(alpha, cloud, rate * (diameter(A.cloud, sys.metric) + 2.0 * A.err), rate * A.err)


def pi_error(sys: GifsSystem, A: AttractorApprox, k: int) -> float:
    return tile_rate(sys) ** (k + 1) * (diameter(A.cloud, sys.metric) + 3.0 * A.err)


_default_attractors: dict = {}


def _attractor_for(sys: GifsSystem, A: AttractorApprox | None) -> AttractorApprox:
    if A is not None:
        return A
    if id(sys) not in _default_attractors:
        _default_attractors[id(sys)] = (sys, attractor(sys, 0.05))
    return _default_attractors[id(sys)][1]


def pi(sys: GifsSystem, a: CodePoint, k: int, A: AttractorApprox | None = None):
    """Approximate x_a from the depth-k tile; returns (point, err)."""
    A = _attractor_for(sys, A)
    x = compose_address(sys, a.head(k), Diag(A.cloud[:1]))
    return np.asarray(x)[0], pi_error(sys, A, k)


def conjugacy_check(sys: GifsSystem, alpha: Address, codes, depth: int, A: AttractorApprox | None = None):
    """Compare f_alpha(pi_k(codes)) with pi(tau_alpha(codes)); returns (residual, budget).

    ``codes`` is a tree of code points one level deeper than alpha (or, for
    depth-0 addresses, a TailSeq of code points).
    """
    A = _attractor_for(sys, A)
    alpha = check_address(alpha)
    k = len(alpha) - 1
    if isinstance(codes, TailSeq):
        if k != 0:
            raise ValueError("a TailSeq of codes only fits depth-0 addresses")
        codes = node({i: leaf(c) for i, c in enumerate(codes.prefix)}, leaf(codes.anchor))
    points = codes.map_leaves(lambda c: tuple(pi(sys, c, depth, A)[0]))
    lhs = np.asarray(compose_address(sys, alpha, points))
    target = compose_shift(alpha, codes)
    rhs, rhs_err = pi(sys, target, depth + k + 1, A)
    lhs_err = tile_rate(sys) ** (k + 1) * pi_error(sys, A, depth)
    return float(base_dist(lhs, rhs, sys.metric)), lhs_err + rhs_err


def discrepancy_bound(alpha: Address, beta: Address, A_diam: float, mp: MetricParams) -> float:
    """Bound on d(f_alpha(x), f_beta(x)) for x in A_{k+1} from the discrepancy sets C_l."""
    alpha, beta = check_address(alpha), check_address(beta)
    if len(alpha) != len(beta):
        raise ValueError("addresses must have equal depth")
    if alpha[0] != beta[0]:
        return A_diam
    # sum over C_l of q^{i_0+...+i_{l-1}} is d_{l,p,q}^p under the 0/1 metric
    vals = [level_dist(a, b, mp, DISCRETE) for a, b in zip(alpha[1:], beta[1:])]
    if not vals:
        return 0.0
    if mp.is_sup:
        return A_diam * max(vals)
    return A_diam * sum(v ** mp.p for v in vals) ** (1.0 / mp.p)


# ------------------------------------------------------------ enumeration/random

def capped_trees(n: int, level: int, cap: int) -> Iterator[NestedSeq]:
    """All symbol trees whose explicit children sit at indices < cap (duplicates removed)."""
    if level == 0:
        for s in range(1, n + 1):
            yield leaf(s)
        return
    subs = list(capped_trees(n, level - 1, cap))
    seen = set()
    import itertools
    for combo in itertools.product(subs, repeat=cap + 1):
        t = node(dict(enumerate(combo[:cap])), combo[cap])
        if t not in seen:
            seen.add(t)
            yield t


def capped_addresses(n: int, k: int, cap: int) -> Iterator[Address]:
    import itertools
    levels = [list(capped_trees(n, l, cap)) for l in range(k + 1)]
    yield from itertools.product(*levels)


def random_code_tree(rng: np.random.Generator, level: int, n: int, width: int = 3) -> NestedSeq:
    if level == 0:
        return leaf(int(rng.integers(1, n + 1)))
    kids = {i: random_code_tree(rng, level - 1, n, width) for i in range(width) if rng.random() < 0.5}
    return node(kids, random_code_tree(rng, level - 1, n, width))


def random_code_point(rng: np.random.Generator, depth: int, n: int, default: int = 1, width: int = 3) -> CodePoint:
    return CodePoint([random_code_tree(rng, k, n, width) for k in range(depth)], default)


# ------------------------------------------------------------------ serialization

def _tree_str(t: NestedSeq) -> str:
    if t.level == 0:
        return str(t.value)
    parts = [_tree_str(t.child(i)) for i in range(t.width)]
    parts.append("*" + _tree_str(t.default))
    return "[" + ",".join(parts) + "]"


def format_address(alpha: Sequence[NestedSeq]) -> str:
    """Nested bracket form, e.g. ``[1,[2,*1]]``; ``*`` marks a default child."""
    return "[" + ",".join(_tree_str(t) for t in alpha) + "]"


_TOKEN = re.compile(r"\s*(\[|\]|,|\*|\d+)")


def _tokens(s: str) -> list:
    out, pos = [], 0
    s = s.strip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"bad address syntax at {pos}: {s[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_address(s: str) -> Address:
    toks = _tokens(s)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            raise ValueError(f"expected {tok!r} in address {s!r}")
        pos += 1

    def tree() -> NestedSeq:
        nonlocal pos
        if pos >= len(toks):
            raise ValueError(f"truncated address {s!r}")
        tok = toks[pos]
        if tok.isdigit():
            pos += 1
            return leaf(int(tok))
        expect("[")
        kids = []
        while toks[pos] != "*":
            kids.append(tree())
            expect(",")
        expect("*")
        dflt = tree()
        expect("]")
        return node(dict(enumerate(kids)), dflt)

    expect("[")
    alpha = [tree()]
    while pos < len(toks) and toks[pos] == ",":
        pos += 1
        alpha.append(tree())
    expect("]")
    if pos != len(toks):
        raise ValueError(f"trailing characters in address {s!r}")
    return check_address(alpha)
