import math

import numpy as np

from wittenlab.logspace import LogValue, LogVector, logsumexp_signed


def test_logvalue_roundtrip():
    # relative roundtrip error grows like eps * |log x|
    assert LogValue.from_float(0.0).to_float() == 0.0
    for x in (3.5, -2.25, 1e-200, -7e154):
        back = LogValue.from_float(x).to_float()
        assert abs(back - x) <= 1e-13 * abs(x)


def test_logvalue_addition_with_cancellation():
    a = LogValue.from_float(5.0)
    b = LogValue.from_float(-5.0)
    assert (a + b).sign == 0.0
    c = LogValue.from_float(3.0) + LogValue.from_float(-1.0)
    assert abs(c.to_float() - 2.0) <= 1e-14


def test_logvalue_overflow_scale():
    big = LogValue.from_float(2.0).scaled(800.0)
    assert big.log == math.log(2.0) + 800.0
    assert np.isinf(big.to_float())
    back = big.scaled(-800.0)
    assert abs(back.to_float() - 2.0) <= 1e-12


def test_logsumexp_signed_matches_direct():
    rng = np.random.default_rng(2)
    for _ in range(20):
        v = rng.normal(size=17) * rng.exponential(size=17)
        s, l = logsumexp_signed(np.sign(v), np.log(np.abs(v)))
        direct = float(np.sum(v))
        assert abs(s * math.exp(l) - direct) <= 1e-16 * np.sum(np.abs(v)) * 40


def test_logvector_dot_extreme_scales():
    # overlapping exponential profiles whose pointwise products overflow floats
    n = 1024
    x = np.linspace(0, 1, n)
    u = LogVector(np.ones(n), 900.0 * x)
    v = LogVector(np.ones(n), 900.0 * (1 - x))
    val = u.dot(v)       # every term equals e^{900}
    assert abs(val.log - (900.0 + math.log(n))) <= 1e-10


def test_logvector_norm_and_normalize():
    vals = np.array([3.0, -4.0])
    lv = LogVector.from_values(vals)
    assert abs(lv.norm_log() - math.log(5.0)) <= 1e-14
    nl = lv.normalized()
    assert np.allclose(nl.to_values(), [0.6, -0.8])


def test_logvector_zero_entries():
    lv = LogVector.from_values(np.array([0.0, 2.0, 0.0]))
    assert lv.sign[0] == 0.0 and lv.log[0] == -np.inf
    assert np.allclose(lv.to_values(), [0.0, 2.0, 0.0])
