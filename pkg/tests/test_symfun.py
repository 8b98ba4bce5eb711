import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bogc_tilt.series import LaurentSeries, factorize, make_rational_factor
from bogc_tilt.symfun import (Partition, bialternant, bialternant_factorization_check,
                              cauchy_binet_sum, complete_homogeneous, enumerate_partitions,
                              gessel_product, grothendieck_eval, grothendieck_tilts, jacobi_trudi,
                              schur_eval, schur_tableaux, schur_tilts, skew_schur,
                              skew_schur_expansion_check, vandermonde)
from bogc_tilt.tilt import TiltFamily, tilted_minor_direct


def test_partition_validation():
    assert Partition((2, 1, 0)).parts == (2, 1)
    with pytest.raises(ValueError):
        Partition((1, 2))
    with pytest.raises(ValueError):
        Partition((1, 1, 1), max_length=2)


def test_enumerate_partitions():
    assert [p.parts for p in enumerate_partitions(0, 3)] == [()]
    assert [p.parts for p in enumerate_partitions(2, 2)] == [(), (1,), (2,), (1, 1)]
    assert len(list(enumerate_partitions(4, 2))) == 9
    seen = [p.parts for p in enumerate_partitions(8, 3)]
    assert len(seen) == len(set(seen))


def test_bialternant_basics():
    Y = [0.3, 0.5, -0.2]
    one = [LaurentSeries.constant(1)] * 3
    np.testing.assert_allclose(bialternant(one, Y), 1, rtol=1e-13)
    np.testing.assert_allclose(schur_eval((1,), Y), sum(Y), rtol=1e-13)
    y1, y2 = 0.3, 0.5
    np.testing.assert_allclose(schur_eval((2, 1), [y1, y2]), y1 * y2 * (y1 + y2), rtol=1e-13)
    np.testing.assert_allclose(schur_tableaux((2, 1), [y1, y2]), y1 * y2 * (y1 + y2), rtol=1e-13)
    with pytest.raises(ValueError):
        bialternant(one[:2], [0.3, 0.3 + 1e-8])


def test_bialternant_factorization_examples():
    Y = [0.3, 0.5]
    plus = make_rational_factor([0.2], "plus", 64)
    one = [LaurentSeries.constant(1)] * 2
    lhs, rhs = bialternant_factorization_check(one, Y, plus, 2)
    np.testing.assert_allclose(lhs, 1 / ((1 - 0.06) * (1 - 0.1)), rtol=1e-12)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)
    lhs, rhs = bialternant_factorization_check(schur_tilts((2, 1), 2), Y, LaurentSeries.constant(1), 2)
    np.testing.assert_allclose(lhs, schur_eval((2, 1), Y), rtol=1e-12)
    lhs, rhs = bialternant_factorization_check(schur_tilts((2, 1), 2), Y, plus, 2)
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_grothendieck():
    Y = [0.3, 0.5]
    beta = 0.7
    np.testing.assert_allclose(grothendieck_eval((1,), beta, Y, "G"), 0.3 + 0.5 + beta * 0.15, rtol=1e-13)
    for variant in ("G", "G_tilde"):
        np.testing.assert_allclose(grothendieck_eval((), beta, Y, variant), 1, rtol=1e-13)
    for lam in enumerate_partitions(5, 3):
        Y3 = [0.3, 0.5, 0.7]
        np.testing.assert_allclose(grothendieck_eval(lam, 0.0, Y3, "G"), schur_eval(lam, Y3), rtol=1e-10)
        # All tilts (1 + 0 z)^k equal 1, so the second variant is the unit bialternant at beta = 0.
        np.testing.assert_allclose(grothendieck_eval(lam, 0.0, Y3, "G_tilde"), 1, rtol=1e-10)
    with pytest.raises(ValueError):
        grothendieck_tilts((1,), beta, 2, "H")


def test_g_tilde_determinant_form():
    Y = np.array([0.3, 0.5, 0.7])
    beta, lam = 0.4, (2, 1, 1)
    A = np.array([[y ** (3 - j - 1) * (1 + beta * y) ** lam[j] for j in range(3)] for y in Y])
    np.testing.assert_allclose(grothendieck_eval(lam, beta, Y, "G_tilde"), np.linalg.det(A) / vandermonde(Y),
                               rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.01, 0.6), min_size=2, max_size=4, unique=True), st.integers(0, 6),
       st.randoms(use_true_random=False))
def test_schur_consistency(ys, w, rnd):
    ys = sorted(ys)
    if min(np.diff(ys)) < 1e-3:
        return
    N = len(ys)
    h = complete_homogeneous(ys, w + N + 2)
    for lam in (p for p in enumerate_partitions(w, N) if p.weight == w):
        a = schur_eval(lam, ys)
        b = jacobi_trudi(lam, [h] * N)
        c = schur_tableaux(lam, ys)
        perm = list(ys)
        rnd.shuffle(perm)
        d = schur_eval(lam, perm)
        for other in (b, c, d):
            assert abs(a - other) <= 1e-9 * max(abs(a), 1e-300) + 1e-15


def test_jacobi_trudi_basics():
    h = complete_homogeneous([0.4], 10)
    np.testing.assert_allclose(jacobi_trudi((), [h, h]), 1)
    np.testing.assert_allclose(jacobi_trudi((3,), [h]), 0.4 ** 3)
    assert jacobi_trudi((1,), [np.zeros(5), h]) == 0


def test_skew_schur():
    x = [0.3, 0.5]
    np.testing.assert_allclose(skew_schur((2, 1), (2, 1), x), 1)
    assert skew_schur((1,), (2,), x) == 0
    np.testing.assert_allclose(skew_schur((2, 1), (1,), x), (0.8) ** 2, rtol=1e-13)
    np.testing.assert_allclose(schur_tableaux((2, 1), x, (1,)), (0.8) ** 2, rtol=1e-13)
    np.testing.assert_allclose(skew_schur((3, 2, 1), (1, 1), [0.3, 0.5, 0.2]),
                               schur_tableaux((3, 2, 1), [0.3, 0.5, 0.2], (1, 1)), rtol=1e-12)


def test_skew_schur_expansion():
    r = skew_schur_expansion_check([0.3], [0.4], (1,), (), 2, cutoff=30)
    assert abs(r.partial_sum - r.direct) <= 1e-8
    assert r.min_summand >= -1e-12
    r = skew_schur_expansion_check([0.3, 0.2], [0.4, 0.1], (), (), 2, cutoff=30)
    np.testing.assert_allclose(r.direct, gessel_product([0.3, 0.2], [0.4, 0.1]), rtol=1e-10)
    assert abs(r.partial_sum - r.direct) <= 1e-8


def test_cauchy_binet_trivial_cutoff():
    fact = factorize({"type": "exponential", "times": [0.3]}, 128)
    r = cauchy_binet_sum(fact, TiltFamily.trivial(2), 2, weight_cutoff=0)
    assert r.terms == 1
    np.testing.assert_allclose(r.partial_sum, 1, rtol=1e-14)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_cauchy_binet_gessel(N):
    fact = factorize({"type": "exponential", "times": [0.3]}, 128)
    r = cauchy_binet_sum(fact, TiltFamily.trivial(N), N, tol=1e-10)
    direct = tilted_minor_direct(fact.phi, TiltFamily.trivial(N), N)
    assert abs(r.partial_sum - direct) <= max(1e-8, r.tail_estimate)


def test_cauchy_binet_random_tilts():
    rng = np.random.default_rng(4)
    fact = factorize({"type": "exponential", "times": [0.3]}, 128)
    draw = lambda: rng.random(3) + 1j * rng.random(3)
    tilts = TiltFamily.from_coefficients([draw() for _ in range(3)], [draw() for _ in range(3)])
    r = cauchy_binet_sum(fact, tilts, 3, weight_cutoff=24)
    direct = tilted_minor_direct(fact.phi, tilts, 3)
    assert abs(r.partial_sum - direct) <= max(1e-8, r.tail_estimate)


def test_gessel_product_form():
    for plus, minus in (([0.3], [0.5, 0.1]), ([0.2, 0.4], [0.3, 0.2, 0.1])):
        fact = factorize({"type": "rational", "plus": plus, "minus": minus}, 128)
        for N in (len(plus), len(plus) + 2):
            d = tilted_minor_direct(fact.phi, TiltFamily.trivial(N), N)
            np.testing.assert_allclose(d, gessel_product(plus, minus), rtol=1e-8)
