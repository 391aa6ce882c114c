"""Cantor-type set in the unit square that needs infinitely many arguments.

Tilde symbols are stored 0-based (displayed 1-based).  A level-(j+1) symbol is
the big-endian base-|O_j| number of an m_j-tuple of level-j symbols, so the
alphabet sizes are |O_0| = 4 and |O_{j+1}| = |O_j|^{m_j}.  A tilde code is a
tuple (s_0, ..., s_D) with zeros implied beyond D.

Square layout: the children of a depth-k square form a 2^{m_0...m_k} grid,
symbol s sits at row s // side, column s % side (row 0 at the bottom).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .maps import GifsMap, GifsSystem, LipCert
from .metric import EUCLIDEAN, MetricParams, TailSeq, as_cloud

MAX_SQUARES = 10 ** 6
_DPS = 60


def _prods(ms: Sequence[int]) -> list:
    """P_k = m_0 ... m_k as exact integers."""
    out, acc = [], 1
    for m in ms:
        acc *= int(m)
        out.append(acc)
    return out


def grid_side(ms: Sequence[int], k: int) -> int:
    """Children per axis of a depth-k square: sqrt(4^{m_0...m_k}) = 2^{m_0...m_k}."""
    return 2 ** _prods(ms[:k + 1])[-1]


def alphabet_size(ms: Sequence[int], k: int) -> int:
    """|O_k| = 4^{m_0...m_{k-1}}."""
    return 4 if k == 0 else 4 ** _prods(ms[:k])[-1]


def _check_ms(ms):
    ms = tuple(int(m) for m in ms)
    if not ms or any(m < 1 for m in ms):
        raise ValueError("ms must be a nonempty sequence of positive integers")
    if any(b < a for a, b in zip(ms, ms[1:])):
        raise ValueError("ms must be nondecreasing")
    return ms


@dataclass
class CantorParams:
    K: float
    q: float
    ms: tuple
    ps: list   # mpmath values
    as_: list

    @property
    def depth(self) -> int:
        return len(self.ps) - 1

    def p(self, k: int) -> float:
        return float(self.ps[k])

    def a(self, k: int) -> float:
        return float(self.as_[k])

    def step(self, k: int) -> float:
        """Child pitch h_k = p_k + a_k."""
        return float(self.ps[k] + self.as_[k])

    def residuals(self) -> dict:
        """Relative residuals of the three defining relations, per k."""
        with mpmath.workdps(_DPS):
            r1 = abs(2 * self.ps[0] + self.as_[0] - 1)
            r2, r3 = [], []
            for k in range(self.depth + 1):
                ratio = self.ps[k] / self.as_[k]
                limit = mpmath.mpf(self.K) * mpmath.mpf(self.q) ** self.ms[k] / mpmath.sqrt(2)
                r3.append(float((ratio - limit) / limit))  # negative means strict inequality holds
                if k < self.depth:
                    S = grid_side(self.ms, k)
                    lhs = S * self.ps[k + 1] + (S - 1) * self.as_[k + 1]
                    r2.append(float(abs(lhs - self.ps[k]) / self.ps[k]))
        return {"fin1": float(r1), "fin2": r2, "fin3": r3}


def derive_params(K: float, q: float, ms: Sequence[int], depth: int | None = None,
                  tol: float = 1e-12) -> CantorParams:
    """Side lengths p_k and gaps a_k for k = 0..depth (default len(ms) - 1)."""
    if not (0.0 < K < 1.0 and 0.0 < q < 1.0):
        raise ValueError("K and q must lie in (0, 1)")
    ms = _check_ms(ms)
    depth = len(ms) - 1 if depth is None else depth
    if depth >= len(ms):
        raise ValueError(f"depth {depth} needs at least {depth + 1} entries of ms")
    with mpmath.workdps(_DPS):
        K_, q_ = mpmath.mpf(K), mpmath.mpf(q)
        c = 2 * mpmath.sqrt(2)
        a = [c / (2 * K_ * q_ ** ms[0] + c)]
        p = [(1 - a[0]) / 2]
        for k in range(depth):
            S = mpmath.mpf(grid_side(ms, k))
            a.append(c * p[k] / (S * K_ * q_ ** ms[k + 1] + c * (S - 1)))
            p.append((p[k] - (S - 1) * a[k + 1]) / S)
    params = CantorParams(float(K), float(q), ms, p, a)
    res = params.residuals()
    if res["fin1"] > tol or any(r > tol for r in res["fin2"]) or any(r >= 0 for r in res["fin3"]):
        raise ArithmeticError(f"derived parameters violate the defining relations: {res}")
    return params


# ----------------------------------------------------------------- geometry

@dataclass(frozen=True)
class Square:
    origin: tuple
    side: float


def _offset(params: CantorParams, k: int, s: int) -> tuple:
    """Offset of the level-k child with symbol s inside its parent (or the unit square)."""
    side = 2 if k == 0 else grid_side(params.ms, k - 1)
    row, col = divmod(int(s), side)
    h = params.step(k)
    return (col * h, row * h)


def _check_code(params: CantorParams, code: Sequence[int]):
    for k, s in enumerate(code):
        if not 0 <= s < alphabet_size(params.ms, k):
            raise ValueError(f"symbol {s} out of range at level {k}")
        if k > params.depth:
            raise ValueError(f"code depth {len(code) - 1} exceeds parameter depth {params.depth}")


def square_of(params: CantorParams, code: Sequence[int]) -> Square:
    """I_alpha for a tilde address (s_0, ..., s_k)."""
    _check_code(params, code)
    x = y = 0.0
    for k, s in enumerate(code):
        dx, dy = _offset(params, k, s)
        x += dx
        y += dy
    return Square((x, y), params.p(len(code) - 1))


def point_of_code(params: CantorParams, code: Sequence[int]) -> np.ndarray:
    """Exact point of C for the code extended by zeros: the lower-left corner of its square."""
    if not code:
        return np.zeros(2)
    return np.asarray(square_of(params, code).origin)


def point_diff(params: CantorParams, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    """x_a - x_b summed from the first differing level, so shared offsets cancel exactly."""
    n = max(len(a), len(b))
    a = tuple(a) + (0,) * (n - len(a))
    b = tuple(b) + (0,) * (n - len(b))
    out = np.zeros(2)
    first = next((k for k in range(n) if a[k] != b[k]), n)
    for k in range(first, n):
        da, db = _offset(params, k, a[k]), _offset(params, k, b[k])
        out += (da[0] - db[0], da[1] - db[1])
    return out


def first_difference(a: Sequence[int], b: Sequence[int]) -> int | None:
    n = max(len(a), len(b))
    a = tuple(a) + (0,) * (n - len(a))
    b = tuple(b) + (0,) * (n - len(b))
    return next((k for k in range(n) if a[k] != b[k]), None)


def tilde_addresses(ms: Sequence[int], k: int):
    """All depth-k tilde addresses in lexicographic order."""
    count = 1
    for j in range(k + 1):
        count *= alphabet_size(ms, j)
    if count > MAX_SQUARES:
        raise ValueError(f"{count} depth-{k} squares exceed the enumeration cap {MAX_SQUARES}")
    return itertools.product(*(range(alphabet_size(ms, j)) for j in range(k + 1)))


def squares(params: CantorParams, k: int) -> dict:
    """Depth-k square family keyed by tilde address."""
    if k > params.depth:
        raise ValueError(f"depth {k} exceeds parameter depth {params.depth}")
    return {code: square_of(params, code) for code in tilde_addresses(params.ms, k)}


def square_array(params: CantorParams, k: int) -> np.ndarray:
    """Vectorized depth-k squares as rows (x, y, side)."""
    if k > params.depth:
        raise ValueError(f"depth {k} exceeds parameter depth {params.depth}")
    xy = np.zeros((1, 2))
    for j in range(k + 1):
        n = alphabet_size(params.ms, j)
        side = 2 if j == 0 else grid_side(params.ms, j - 1)
        if len(xy) * n > MAX_SQUARES:
            raise ValueError(f"depth-{k} squares exceed the enumeration cap {MAX_SQUARES}")
        s = np.arange(n)
        off = np.stack([s % side, s // side], axis=1) * params.step(j)
        xy = (xy[:, None, :] + off[None, :, :]).reshape(-1, 2)
    return np.column_stack([xy, np.full(len(xy), params.p(k))])


def locate(params: CantorParams, point, k: int) -> tuple:
    """Depth-k tilde address of the square nearest to ``point`` (clamped per level)."""
    x, y = float(point[0]), float(point[1])
    code = []
    for j in range(k + 1):
        side = 2 if j == 0 else grid_side(params.ms, j - 1)
        h = params.step(j)
        col = min(max(int(math.floor(x / h + 1e-9)), 0), side - 1)
        row = min(max(int(math.floor(y / h + 1e-9)), 0), side - 1)
        code.append(row * side + col)
        x -= col * h
        y -= row * h
    return tuple(code)


# ------------------------------------------------------------ code-index maps

def _encode(symbols: Sequence[int], base: int) -> int:
    v = 0
    for s in symbols:
        v = v * base + int(s)
    return v


def _decode(v: int, base: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        v, s = divmod(v, base)
        out.append(s)
    return tuple(reversed(out))


def cantor_map(i: int, codes: TailSeq, ms: Sequence[int]) -> tuple:
    """i(a_0, a_1, ...) = (i, (a_0^(0), ..., a_{m_0-1}^(0)), (a_0^(1), ..., a_{m_1-1}^(1)), ...).

    ``i`` is 1-based; codes are 0-based tilde codes.  The output depth is one
    more than the deepest argument (zeros beyond), capped by len(ms).
    """
    if not 1 <= i <= 4:
        raise ValueError("cantor maps are indexed 1..4")
    depth = max([len(c) for c in codes.prefix] + [len(codes.anchor)])
    if depth > len(ms):
        raise ValueError(f"argument depth {depth} needs len(ms) >= {depth}")
    out = [i - 1]
    for j in range(depth):
        base = alphabet_size(ms, j)
        syms = [codes[t][j] if j < len(codes[t]) else 0 for t in range(ms[j])]
        out.append(_encode(syms, base))
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def regroup_inverse(code: Sequence[int], ms: Sequence[int], n_args: int) -> tuple:
    """Codes (a_0, ..., a_{n_args-1}) whose level-j entries the output stores (zeros elsewhere)."""
    args = [[0] * (len(code) - 1) for _ in range(n_args)]
    for j in range(len(code) - 1):
        base = alphabet_size(ms, j)
        syms = _decode(code[j + 1], base, ms[j])
        for t, s in enumerate(syms[:n_args]):
            args[t][j] = s
    return tuple(tuple(a) for a in args)


class CodeIndexMap(GifsMap):
    """f_i on C at finite symbolic depth D: x_a -> x_{i(a)} via located addresses."""

    kind = "cantor_index"
    dim = 2

    def __init__(self, i: int, params: CantorParams, D: int):
        if D < 1 or D > params.depth:
            raise ValueError(f"symbolic depth must be in 1..{params.depth}")
        self.i = int(i)
        self.params = params
        self.D = int(D)

    def lipschitz(self, mp: MetricParams) -> float:
        if mp.is_sup and mp.q >= self.params.q:
            return self.params.K
        return math.inf

    def eval(self, x: TailSeq) -> np.ndarray:
        self._check(x)
        n = self.params.ms[self.D - 1]
        codes = [locate(self.params, x[t], self.D - 1) for t in range(n)]
        return point_of_code(self.params, cantor_map(self.i, TailSeq(codes, codes[-1]), self.params.ms))

    def tail_error(self, M: int, diam: float) -> float:
        return 0.0

    def image(self, Ks: TailSeq, M: int, eps: float, metric) -> tuple:
        """Image of prod K_k at depth D; slack covers the depth-D square of each output."""
        ms, D = self.params.ms, self.D
        n = ms[D - 1]
        per_arg = []
        for t in range(n):
            levels = [j for j in range(D) if t < ms[j]]
            located = {tuple(locate(self.params, pt, D - 1)[j] for j in levels)
                       for pt in np.asarray(Ks[t])}
            per_arg.append((levels, sorted(located)))
        total = math.prod(len(v) for _, v in per_arg)
        if total > MAX_SQUARES:
            raise ValueError(f"{total} argument combinations exceed the cap {MAX_SQUARES}")
        pts = []
        for combo in itertools.product(*(v for _, v in per_arg)):
            codes = []
            for (levels, _), proj in zip(per_arg, combo):
                c = [0] * D
                for j, s in zip(levels, proj):
                    c[j] = s
                codes.append(tuple(c))
            out = cantor_map(self.i, TailSeq(codes, (0,)), ms)
            pts.append(point_of_code(self.params, out))
        return as_cloud(np.array(pts), 2), math.sqrt(2.0) * self.params.p(D)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "i": self.i, "K": self.params.K, "q": self.params.q,
                "ms": list(self.params.ms), "depth": self.D}


def cantor_system(params: CantorParams, D: int) -> GifsSystem:
    mp = MetricParams.sup(params.q)
    maps = [CodeIndexMap(i, params, D) for i in range(1, 5)]
    return GifsSystem(maps, mp, EUCLIDEAN, [LipCert(mp, params.K) for _ in maps],
                      name=f"cantor-depth{D}", anchor=np.zeros(2))


def depth_centers(params: CantorParams, k: int) -> np.ndarray:
    sq = square_array(params, k)
    return sq[:, :2] + sq[:, 2:3] / 2.0


def depth_corners(params: CantorParams, k: int) -> np.ndarray:
    return square_array(params, k)[:, :2]


# ------------------------------------------------------ exact certificates

def _S(ms: Sequence[int], j: int) -> int:
    """1 + m_0 + m_0 m_1 + ... + m_0...m_j (S_{-1} = 1)."""
    return 1 + sum(_prods(ms[:j + 1])) if j >= 0 else 1


def check_fin4(ms: Sequence[int], k_max: int) -> list:
    """(S_{k-1})(k-1) - m_0...m_k < -k for k = 1..k_max, in exact integers."""
    ms = tuple(int(m) for m in ms)
    if k_max >= len(ms):
        raise ValueError(f"k_max={k_max} needs at least {k_max + 1} entries of ms")
    return [_S(ms, k - 1) * (k - 1) - _prods(ms[:k + 1])[-1] < -k for k in range(1, k_max + 1)]


def minimal_fin4_sequence(k_max: int) -> tuple:
    """Greedy least nondecreasing (m_0, ..., m_{k_max}) satisfying the counting inequality."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ms = [1]
    for k in range(1, k_max + 1):
        need = _S(ms, k - 1) * (k - 1) + k  # P_{k-1} * m_k must exceed this
        P = _prods(ms)[-1]
        ms.append(max(ms[-1], need // P + 1))
    ms = tuple(ms)
    if not all(check_fin4(ms, k_max)):
        raise ArithmeticError(f"greedy sequence {ms} fails its own check")
    return ms


@dataclass(frozen=True)
class MeasureCertificate:
    ms: tuple
    m: int
    k: int
    r_k_exponent: int
    tile_exponent: int
    ratio: Fraction
    bound: Fraction
    ok: bool

    @property
    def r_k(self) -> int:
        return 4 ** self.r_k_exponent

    def to_dict(self) -> dict:
        return {"ms": list(self.ms), "m": self.m, "k": self.k, "r_k_exponent": self.r_k_exponent,
                "tile_exponent": self.tile_exponent, "ok": self.ok}


def measure_certificate(ms: Sequence[int], m: int, k: int) -> MeasureCertificate:
    """r_k = 4^{m S_{k-1}} tiles cover an order-m image; compare r_k / 4^{S_k} with 4^{-k} exactly."""
    ms = tuple(int(x) for x in ms)
    if m < 1:
        raise ValueError("m must be >= 1")
    if k < m:
        raise ValueError("measure certificate needs k >= m")
    if k >= len(ms):
        raise ValueError(f"k={k} needs at least {k + 1} entries of ms")
    r_exp, t_exp = m * _S(ms, k - 1), _S(ms, k)
    ratio = Fraction(4 ** r_exp, 4 ** t_exp)
    bound = Fraction(1, 4 ** k)
    return MeasureCertificate(ms, m, k, r_exp, t_exp, ratio, bound, ratio < bound)


def certificate_sweep(ms: Sequence[int], k_max: int) -> list:
    return [measure_certificate(ms, m, k) for k in range(1, k_max + 1) for m in range(1, k + 1)]
