import math
from fractions import Fraction

import numpy as np
import pytest

from hutchinf.maps import (EMPIRICAL, AffineSum, Constant, GifsSystem, LipCert, SupScale, classify,
                           empirical_lipschitz, error_bound, gen_fixed_point, tail_error, tilde_eval,
                           truncate)
from hutchinf.metric import ABSOLUTE, MAXIMUM, MetricParams, TailSeq, base_dist, seq_dist
from hutchinf.systems import planar_system, sup_interval_system


def random_tailseq(rng, dim, n=6, scale=1.0):
    return TailSeq(list(rng.uniform(-scale, scale, (int(rng.integers(0, n)), dim))),
                   rng.uniform(-scale, scale, dim))


def test_planar_eval_examples(planar):
    f1, f4 = planar.maps[0], planar.maps[3]
    assert np.array_equal(f1.eval(TailSeq.constant(np.zeros(2))), [0.0, 0.0])
    # 1/2 + sum 1/(10 4^k) = 1/2 + 2/15 = 19/30
    assert np.allclose(f4.eval(TailSeq.constant(np.ones(2))), [19 / 30, 19 / 30], atol=1e-15)
    assert np.allclose(tilde_eval(f1, [1.0, 1.0]), [2 / 15, 2 / 15], atol=1e-15)


def test_affine_eval_against_long_sum(rng):
    f = AffineSum(0.3, -0.6, [1.0, 2.0])
    for _ in range(20):
        x = random_tailseq(rng, 2)
        ref = np.array([1.0, 2.0]) + sum(0.3 * (-0.6) ** k * np.asarray(x[k]) for k in range(400))
        assert np.allclose(f.eval(x), ref, atol=1e-13)


def test_sup_scale_and_constant():
    f = SupScale(0.5)
    assert f.eval(TailSeq([[1.0], [1 / 3]], [0.0]))[0] == 0.5
    assert f.tilde([0.8])[0] == 0.4
    c = Constant([2.0, 3.0])
    assert np.array_equal(c.tilde([9.0, 9.0]), [2.0, 3.0])
    with pytest.raises(ValueError):
        SupScale(-1)
    with pytest.raises(ValueError):
        AffineSum(1.0, 1.0, [0.0])


def test_batched_eval(rng, planar):
    pts = rng.uniform(size=(7, 2))
    x = TailSeq([pts, pts * 2], pts * 3)
    out = planar.maps[2].eval(x)
    for i in range(7):
        single = planar.maps[2].eval(TailSeq([pts[i], pts[i] * 2], pts[i] * 3))
        assert np.allclose(out[i], single, atol=1e-15)


def test_dimension_mismatch(planar):
    with pytest.raises(ValueError):
        planar.maps[0].eval(TailSeq.constant(np.zeros(3)))


def test_lipschitz_certs():
    f = AffineSum(0.1, 0.25, [0.0, 0.0])
    # sum 0.1 4^{-k} 2^k = 0.1 / (1 - 1/2)
    assert f.lipschitz(MetricParams.sup(0.5)) == pytest.approx(0.2, abs=1e-16)
    assert f.lipschitz(MetricParams.sup(0.25)) == math.inf
    assert f.lipschitz(MetricParams.lp(1, 0.5)) == 0.1
    assert SupScale(0.5).lipschitz(MetricParams.sup(1.0)) == 0.5
    assert SupScale(0.5).lipschitz(MetricParams.sup(0.5)) == math.inf
    assert Constant([1.0]).lipschitz(MetricParams.lp(2, 0.5)) == 0.0


@pytest.mark.parametrize("mp", [MetricParams.sup(0.5), MetricParams.sup(0.8), MetricParams.sup(1.0),
                                MetricParams.lp(1, 0.5), MetricParams.lp(2, 0.3), MetricParams.lp(3, 0.6)])
def test_empirical_never_exceeds_declared(rng, mp):
    maps = [AffineSum(0.1, 0.25, [0.5, 0.0]), AffineSum(-0.2, 0.1, [0.0, 0.0]), Constant([1.0, 1.0])]
    for f in maps:
        L = f.lipschitz(mp)
        pairs = [(random_tailseq(rng, 2), random_tailseq(rng, 2)) for _ in range(1000)]
        assert empirical_lipschitz(f, pairs, mp) <= L + 1e-10
    f = SupScale(0.5)
    L = f.lipschitz(mp)
    pairs = [(random_tailseq(rng, 1), random_tailseq(rng, 1)) for _ in range(1000)]
    assert empirical_lipschitz(f, pairs, mp, ABSOLUTE) <= L + 1e-10


def test_sup_cert_is_attained():
    """A worst-case pair for the sup-kind affine cert: signs aligned, |x_k - y_k| = q^{-k}."""
    f = AffineSum(0.1, 0.25, [0.0])
    q = 0.5
    x = TailSeq([[q ** -k] for k in range(60)], [0.0])
    y = TailSeq.constant([0.0])
    ratio = base_dist(f.eval(x), f.eval(y)) / seq_dist(x, y, MetricParams.sup(q))
    assert ratio == pytest.approx(f.lipschitz(MetricParams.sup(q)), rel=1e-12)


def test_lp_cert_not_above_sup_cert():
    for c, r, q, p in [(0.1, 0.25, 0.5, 1), (0.1, 0.25, 0.5, 2), (0.3, 0.2, 0.6, 3)]:
        f = AffineSum(c, r, [0.0])
        assert f.lipschitz(MetricParams.lp(p, q ** p)) <= f.lipschitz(MetricParams.sup(q)) + 1e-15


def test_classify_examples(planar, sup_pair):
    assert planar.L == pytest.approx(0.2, abs=1e-16)
    assert classify(planar) == {"Q", "S2", "S1"}
    assert classify(sup_pair) == {"S2", "S1"}
    assert classify(sup_interval_system()) == {"S1"}
    lp = GifsSystem(planar.maps, MetricParams.lp(1, 0.5), MAXIMUM)
    assert classify(lp) == {"P", "S2", "S1"}
    inf = GifsSystem([SupScale(0.5)], MetricParams.sup(0.5), ABSOLUTE)
    assert classify(inf) == frozenset()
    weak = GifsSystem([AffineSum(0.9, 0.1, [0.0])], MetricParams.sup(0.5), ABSOLUTE)
    assert classify(weak) == frozenset()


def test_system_validation(planar):
    with pytest.raises(ValueError):
        GifsSystem([], MetricParams.sup(0.5))
    with pytest.raises(ValueError):
        GifsSystem([AffineSum(0.1, 0.2, [0.0]), AffineSum(0.1, 0.2, [0.0, 0.0])], MetricParams.sup(0.5))
    with pytest.raises(ValueError):
        GifsSystem(planar.maps, MetricParams.sup(0.5),
                   certs=[LipCert(MetricParams.sup(0.4), 0.2, EMPIRICAL)] * 4)


def test_error_bound_examples():
    mp = MetricParams.sup(0.5)
    assert error_bound(mp, 0.2, 3, 1.0) == pytest.approx(0.1, abs=1e-16)
    assert error_bound(mp, 0.2, 1, 1.0) == pytest.approx(0.2 / 0.5)
    lp = MetricParams.lp(2, 0.5)
    assert error_bound(lp, 0.5, 1, 1.0) == pytest.approx(0.5 / (1 - math.sqrt(0.75)))
    with pytest.raises(ValueError):
        error_bound(MetricParams.lp(1, 0.5), 0.6, 2, 1.0)
    with pytest.raises(ValueError):
        error_bound(MetricParams.sup(1.0), 0.2, 2, 1.0)


def test_gen_fixed_point(planar):
    mp = planar.mp
    seed = TailSeq.constant(np.zeros(2))
    x, bound = gen_fixed_point(planar.maps[3], seed, 1e-12, mp, MAXIMUM)
    # x = 1/2 + (2/15) x
    exact = float(Fraction(1, 2) / (1 - Fraction(2, 15)))
    assert exact == pytest.approx(15 / 26)
    assert np.max(np.abs(x - exact)) <= 1e-12
    assert bound <= 1e-12
    assert base_dist(tilde_eval(planar.maps[3], x), x, MAXIMUM) <= 2e-12
    x1, _ = gen_fixed_point(planar.maps[0], seed, 1e-12, mp, MAXIMUM)
    assert np.array_equal(x1, [0.0, 0.0])
    c, b = gen_fixed_point(Constant([3.0]), TailSeq.constant([0.0]), 1e-9, mp)
    assert c[0] == 3.0 and b == 0.0
    with pytest.raises(ValueError):
        gen_fixed_point(SupScale(0.5), TailSeq.constant([0.0]), 1e-6, MetricParams.sup(0.5))


def test_truncate():
    f1 = planar_system().maps[0]
    t = truncate(f1, 1, [0.0, 0.0])
    assert np.allclose(t([np.array([1.0, 2.0])]), [0.1, 0.2], atol=1e-16)
    a = np.array([0.3, 0.7])
    t3 = truncate(f1, 3, a)
    assert np.allclose(t3([a, a, a]), tilde_eval(f1, a), atol=1e-15)
    c = truncate(Constant([5.0]), 4, [0.0])
    assert c([[1.0]] * 4)[0] == 5.0
    with pytest.raises(ValueError):
        t3([a])
    with pytest.raises(ValueError):
        truncate(f1, 0, a)


def test_truncated_fixed_points_converge(planar):
    f = planar.maps[3]
    star, _ = gen_fixed_point(f, TailSeq.constant(np.zeros(2)), 1e-14, planar.mp, MAXIMUM)
    prev = math.inf
    for m in range(1, 9):
        t = truncate(f, m, np.zeros(2))
        # fixed point of x -> t(x, ..., x): affine with slope sum_{k<m} c_k
        slope = sum(0.1 * 0.25 ** k for k in range(m))
        xm = 0.5 / (1 - slope)
        assert np.allclose(t([np.full(2, xm)] * m), xm, atol=1e-14)
        d = abs(xm - star[0])
        assert d < prev
        assert d <= tail_error(f, m, 1.0) / (1 - 2 / 15) + 1e-14
        prev = d


def test_tail_error_examples():
    f1 = planar_system().maps[0]
    assert tail_error(f1, 3, 1.0) == pytest.approx(1 / 480, rel=1e-14)
    assert tail_error(f1, 0, 1.0) == pytest.approx(2 / 15, rel=1e-14)
    assert tail_error(Constant([1.0]), 0, 5.0) == 0.0
    assert tail_error(SupScale(0.5), 4, 2.0) == 1.0
    with pytest.raises(ValueError):
        tail_error(f1, -1, 1.0)


def test_to_dict_roundtrip_fields(sup_pair):
    d = planar_system().maps[1].to_dict()
    assert d["kind"] == "affine_sum" and d["offset"] == [0.0, 0.5]
    assert sup_pair.maps[0].to_dict()["kind"] == "sup_scale"
