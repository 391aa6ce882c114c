import hashlib
import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from hutchinf import cantor as cl
from hutchinf.engine import attractor
from hutchinf.io import ppm_bytes, rasterize_squares
from hutchinf.maps import classify
from hutchinf.metric import TailSeq, hausdorff
from hutchinf.verify import lipschitz_ratios, random_tilde_code

GREEDY = (1, 2, 4, 4, 5)


@pytest.fixture(scope="module")
def params():
    return cl.derive_params(0.5, 0.5, GREEDY)


def test_derive_params_example(params):
    with mpmath.workdps(50):
        c = 2 * mpmath.sqrt(2)
        a0 = c / (mpmath.mpf(0.5) + c)
        p0 = mpmath.mpf(0.25) / (mpmath.mpf(0.5) + c)
    assert params.a(0) == pytest.approx(float(a0), rel=1e-15)
    assert params.p(0) == pytest.approx(float(p0), rel=1e-15)
    assert 2 * params.p(0) + params.a(0) == pytest.approx(1.0, abs=1e-15)


def test_residuals_up_to_k5():
    p = cl.derive_params(0.5, 0.5, GREEDY + (5,))
    res = p.residuals()
    assert res["fin1"] <= 1e-12
    assert len(res["fin2"]) == 5 and max(res["fin2"]) <= 1e-12
    assert len(res["fin3"]) == 6 and max(res["fin3"]) < 0


def test_spacing_ratio_is_half_the_limit(params):
    """p_k / a_k lands at exactly half of K q^{m_k} / sqrt 2 by construction."""
    for r in params.residuals()["fin3"]:
        assert r == pytest.approx(-0.5, abs=1e-15)


def test_derive_params_errors():
    with pytest.raises(ValueError):
        cl.derive_params(1.0, 0.5, GREEDY)
    with pytest.raises(ValueError):
        cl.derive_params(0.5, 0.5, (2, 1))
    with pytest.raises(ValueError):
        cl.derive_params(0.5, 0.5, (1, 2), depth=2)


def test_depth0_corner_squares(params):
    sq = cl.squares(params, 0)
    p0 = params.p(0)
    corners = {(0.0, 0.0), (1.0 - p0, 0.0), (0.0, 1.0 - p0), (1.0 - p0, 1.0 - p0)}
    got = {(round(s.origin[0], 15), round(s.origin[1], 15)) for s in sq.values()}
    assert got == {(round(x, 15), round(y, 15)) for x, y in corners}
    assert all(s.side == p0 for s in sq.values())


def _inside(child, parent, tol=1e-14):
    return all(parent.origin[i] - tol <= child.origin[i] and
               child.origin[i] + child.side <= parent.origin[i] + parent.side + tol for i in range(2))


def test_children_inside_and_gaps(params):
    for k in range(2):
        parents = cl.squares(params, k)
        children = cl.squares(params, k + 1)
        for code, sq in children.items():
            assert _inside(sq, parents[code[:-1]])
        # adjacent children in the same row differ by p_{k+1} + a_{k+1}
        base = (0,) * (k + 1)
        c0, c1 = children[base + (0,)], children[base + (1,)]
        gap = c1.origin[0] - (c0.origin[0] + c0.side)
        assert gap == pytest.approx(params.a(k + 1), rel=1e-12)
        # the last child touches the far edge of its parent (the family fills the parent)
        side = cl.grid_side(params.ms, k)
        last = children[base + (side * side - 1,)]
        assert last.origin[0] + last.side == pytest.approx(parents[base].origin[0] + parents[base].side, abs=1e-14)


def test_squares_disjoint(params):
    for k in range(3):
        sq = cl.square_array(params, k)
        assert len(sq) == np.prod([cl.alphabet_size(params.ms, j) for j in range(k + 1)])
        order = np.lexsort((sq[:, 0], sq[:, 1]))
        s = sq[order]
        p = params.p(k)
        # same row: x gaps positive; different rows: y gaps positive
        same_row = np.isclose(s[1:, 1], s[:-1, 1])
        assert np.all(s[1:, 0][same_row] - s[:-1, 0][same_row] > p)
        ys = np.unique(s[:, 1])
        assert np.all(np.diff(ys) > p)


def test_square_array_matches_dict(params):
    for k in range(3):
        arr = cl.square_array(params, k)
        d = cl.squares(params, k)
        codes = list(cl.tilde_addresses(params.ms, k))
        for code, row in zip(codes[::97], arr[::97]):
            assert np.allclose(row[:2], d[code].origin, atol=1e-15) and row[2] == d[code].side


def test_enumeration_cap():
    p = cl.derive_params(0.5, 0.5, GREEDY)
    with pytest.raises(ValueError):
        cl.square_array(p, 3)
    with pytest.raises(ValueError):
        list(cl.tilde_addresses(GREEDY, 3))


def test_locate_inverts_square_of(params):
    rng = np.random.default_rng(1)
    for _ in range(200):
        code = random_tilde_code(rng, params.ms, 2)
        sq = cl.square_of(params, code)
        center = np.asarray(sq.origin) + sq.side / 2
        assert cl.locate(params, center, 2) == code


def test_cantor_map_examples():
    ms = GREEDY
    ones = TailSeq.constant((0,))
    for i in range(1, 5):
        assert cl.cantor_map(i, ones, ms) == (i - 1,)
    # level 0 takes m_0 = 1 argument; level 1 packs (a_0^(1), a_1^(1)) = (0, 1) in base 4
    codes = TailSeq([(2,), (3, 1)], (0,))
    assert cl.cantor_map(2, codes, ms) == (1, 2, 1)
    with pytest.raises(ValueError):
        cl.cantor_map(5, ones, ms)


def test_cantor_map_regrouping_by_hand():
    ms = (1, 2, 4)
    codes = TailSeq([(3, 2), (1, 3), (2,)], (0,))
    # level 0 of the output holds (a_0^(0)) -> 3; level 1 holds (a_0^(1), a_1^(1)) in base |O_1| = 4
    assert cl.cantor_map(1, codes, ms) == (0, 3, 2 * 4 + 3)
    assert cl.regroup_inverse((0, 3, 11), ms, 2) == ((3, 2), (0, 3))


def test_cantor_map_constant_one_is_corner(params):
    out = cl.cantor_map(1, TailSeq.constant((0, 0, 0)), params.ms)
    assert out == (0,)
    assert np.array_equal(cl.point_of_code(params, out), [0.0, 0.0])
    assert cl.square_of(params, (0, 0, 0, 0)).origin == (0.0, 0.0)


def test_cantor_map_lipschitz(params):
    ratios = lipschitz_ratios(params, 500, seed=7, D=2)
    assert len(ratios) == 500
    assert max(ratios) <= params.K


def test_separation_lower_bound(params):
    rng = np.random.default_rng(3)
    for _ in range(300):
        depth = int(rng.integers(1, 3))
        a = random_tilde_code(rng, params.ms, depth)
        b = list(a)
        eta = int(rng.integers(0, depth + 1))
        b[eta] = (b[eta] + int(rng.integers(1, cl.alphabet_size(params.ms, eta)))) % cl.alphabet_size(params.ms, eta)
        for j in range(eta + 1, depth + 1):
            b[j] = int(rng.integers(cl.alphabet_size(params.ms, j)))
        assert cl.first_difference(a, b) == eta
        d = np.linalg.norm(cl.point_diff(params, a, b))
        assert d >= params.a(eta) * (1 - 1e-12)


def test_fin4_examples():
    assert cl.check_fin4((2, 8, 2, 4, 5), 4) == [True] * 4
    assert cl.check_fin4((1, 1, 1), 2) == [False, False]
    # k = 1 reduces to -m_0 m_1 < -1
    for m0, m1 in itertools.product(range(1, 4), repeat=2):
        assert cl.check_fin4((m0, m1), 1) == [m0 * m1 >= 2]
    with pytest.raises(ValueError):
        cl.check_fin4((1, 2), 2)


def test_fin4_brute_force_oracle():
    def lhs(ms, k):
        s = sum(math.prod(ms[:j + 1]) for j in range(k))
        return (1 + s) * (k - 1) - math.prod(ms[:k + 1])
    for ms in [(2, 8, 2, 4, 5), GREEDY, (1, 1, 1, 1), (3, 3, 3, 3, 3)]:
        assert cl.check_fin4(ms, 4 if len(ms) > 4 else 3) == [lhs(ms, k) < -k for k in range(1, min(5, len(ms)))]


def test_greedy_sequence():
    ms = cl.minimal_fin4_sequence(4)
    assert ms == GREEDY
    assert all(cl.check_fin4(ms, 4))
    assert all(b >= a for a, b in zip(ms, ms[1:]))
    for j in range(len(ms)):
        if ms[j] == 1:
            continue
        smaller = list(ms)
        smaller[j] -= 1
        monotone = all(b >= a for a, b in zip(smaller, smaller[1:]))
        assert not monotone or not all(cl.check_fin4(smaller, 4))
    with pytest.raises(ValueError):
        cl.minimal_fin4_sequence(0)


def test_measure_certificate_example():
    c = cl.measure_certificate((2, 8, 2, 4, 5), 2, 2)
    assert c.r_k_exponent == 38 and c.tile_exponent == 51
    assert c.r_k == 4 ** 38
    assert c.ratio == Fraction(1, 4 ** 13) and c.bound == Fraction(1, 16)
    assert c.ok
    assert c.to_dict() == {"ms": [2, 8, 2, 4, 5], "m": 2, "k": 2, "r_k_exponent": 38, "tile_exponent": 51,
                           "ok": True}
    with pytest.raises(ValueError):
        cl.measure_certificate(GREEDY, 3, 2)


def test_certificate_m_equals_k_is_fin4():
    for ms in [(2, 8, 2, 4, 5), GREEDY, (1, 1, 1, 1), (1, 2, 2, 2, 2)]:
        fin4 = cl.check_fin4(ms, len(ms) - 1)
        certs = [cl.measure_certificate(ms, k, k).ok for k in range(1, len(ms))]
        assert certs == fin4


def test_certificate_sweep():
    certs = cl.certificate_sweep(GREEDY, 4)
    assert len(certs) == 10 and all(c.ok for c in certs)
    assert not all(c.ok for c in cl.certificate_sweep((1, 1, 1), 2))


@pytest.mark.parametrize("ms,D", [((1, 1, 1, 1), 3), (GREEDY, 2)])
def test_cantor_set_is_attractor(ms, D):
    p = cl.derive_params(0.5, 0.5, ms)
    sys = cl.cantor_system(p, D)
    assert classify(sys) == {"Q", "S2", "S1"}
    A = attractor(sys, 1e-3)
    centers = cl.depth_centers(p, D)
    assert len(A.cloud) == len(centers) == 256
    assert hausdorff(A.cloud, centers) <= math.sqrt(2) * p.p(D)
    assert hausdorff(A.cloud, cl.depth_corners(p, D)) == 0.0


def test_code_index_map_errors(params):
    with pytest.raises(ValueError):
        cl.CodeIndexMap(1, params, 0)
    with pytest.raises(ValueError):
        cl.CodeIndexMap(1, params, params.depth + 1)


def test_depth3_render_byte_stable():
    p = cl.derive_params(0.5, 0.5, (1, 1, 1, 1))
    digests = set()
    for _ in range(2):
        img = rasterize_squares(cl.square_array(p, 3), ((0.0, 0.0), (1.0, 1.0)), (256, 256))
        digests.add(hashlib.sha256(ppm_bytes(img)).hexdigest())
    assert len(digests) == 1
    img = rasterize_squares(cl.square_array(p, 0), ((0.0, 0.0), (1.0, 1.0)), (64, 64))
    # the four corner pixels are black
    assert not img[0, 0] and not img[0, -1] and not img[-1, 0] and not img[-1, -1]
