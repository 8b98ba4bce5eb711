import math

import mpmath as mp
import numpy as np
import pytest

from bogc_tilt.operators import (WindowError, bogc_kernel, bogc_rhs, fredholm_det, hankel_matrix,
                                 jacobi_minor_check, oblique_jacobi_check, szego_Z, toeplitz_det,
                                 toeplitz_matrix, verify_wh_identity)
from bogc_tilt.series import LaurentSeries, factorize, make_exponential_symbol, series_exp

BESSEL = {"type": "exponential", "times": [0.3]}


def test_toeplitz_basics():
    np.testing.assert_array_equal(toeplitz_matrix(LaurentSeries.constant(1), 5).entries, np.eye(5))
    z = LaurentSeries.monomial(1).restrict(-3, 3)
    np.testing.assert_array_equal(toeplitz_matrix(z, 4).entries, np.eye(4, k=-1))
    f = make_exponential_symbol([0.3], 16)
    T = toeplitz_matrix(f, 6).entries
    for i in range(6):
        for j in range(6):
            np.testing.assert_allclose(T[i, j].real, float(mp.besseli(abs(i - j), 0.6)), rtol=1e-13)


def test_toeplitz_window_error():
    with pytest.raises(WindowError):
        toeplitz_matrix(LaurentSeries(-2, [1, 1, 1, 1, 1]), 6)


def test_hankel_basics():
    np.testing.assert_array_equal(hankel_matrix(LaurentSeries.constant(1), 4).entries, 0)
    H = hankel_matrix(LaurentSeries.monomial(1).restrict(0, 5), 3).entries
    assert H[0, 0] == 1 and np.count_nonzero(H) == 1


def test_hankel_of_b_matches_series_exp():
    t = 0.3
    fact = factorize(BESSEL, 64)
    # b = exp(t (1/z - z)) computed independently as a product of two one-sided exponentials.
    plus = series_exp(LaurentSeries(1, [-t]), 80)
    minus = series_exp(LaurentSeries(-1, [t]), 80)
    b = plus * minus
    H = hankel_matrix(fact.b, 8).entries
    for i in range(8):
        for j in range(8):
            np.testing.assert_allclose(H[i, j], b.coeff(i + j + 1), atol=1e-15)


def test_kernel_trivial_and_symmetric():
    fact1 = factorize({"type": "exponential", "times": []}, 32)
    np.testing.assert_array_equal(bogc_kernel(fact1, 8).entries, 0)
    K = bogc_kernel(factorize({"type": "exponential", "times": [0.3, 0.1]}, 160), 64).entries
    np.testing.assert_allclose(K, K.T, atol=1e-14)


def test_kernel_szego_value():
    fact = factorize(BESSEL, 160)
    d = fredholm_det(bogc_kernel(fact, 64)).value
    np.testing.assert_allclose(d, math.exp(-0.09), rtol=1e-9)
    np.testing.assert_allclose(d * szego_Z(fact), 1, rtol=1e-12)


def test_fredholm_trivial():
    assert fredholm_det(np.zeros((4, 4))).value == 1
    a = np.zeros((5, 5))
    a[0, 0] = 0.3
    np.testing.assert_allclose(fredholm_det(a).value, 0.7)
    with pytest.raises(ValueError):
        fredholm_det(a, 5)


def test_fredholm_doubling_shrinks():
    deltas = []
    for M in (8, 16):
        fact = factorize({"type": "exponential", "times": [0.6]}, 4 * M)
        deltas.append(fredholm_det(bogc_kernel(fact, M)).doubling_delta)
    assert deltas[1] <= deltas[0] / 10


def test_triangularity():
    fact = factorize({"type": "rational", "plus": [0.3], "minus": [0.4]}, 64)
    Tp = toeplitz_matrix(fact.phi_plus, 12).entries
    Tm = toeplitz_matrix(fact.phi_minus, 12).entries
    np.testing.assert_array_equal(np.triu(Tp, 1), 0)
    np.testing.assert_array_equal(np.tril(Tm, -1), 0)
    np.testing.assert_array_equal(np.diag(Tp), 1)
    np.testing.assert_array_equal(np.diag(Tm), 1)


@pytest.mark.parametrize("sym", [
    BESSEL,
    {"type": "exponential", "times": [0.2, 0.05]},
    {"type": "rational", "plus": [0.2], "minus": [0.3, 0.5]},
])
def test_bogc_identity(sym):
    fact = factorize(sym, 272)
    K = bogc_kernel(fact, 128)
    np.testing.assert_allclose(fredholm_det(K).value * fact.szego_Z, 1, rtol=1e-8)
    for N in range(1, 9):
        d = toeplitz_det(fact.phi, N)
        assert abs(d - bogc_rhs(fact, N, 128, K)) <= 1e-8 * abs(d)


def test_wh_identity():
    assert verify_wh_identity(factorize({"type": "exponential", "times": []}, 32), 8) == 0
    assert verify_wh_identity(factorize(BESSEL, 160), 64) <= 1e-9
    assert verify_wh_identity(factorize({"type": "rational", "plus": [], "minus": [0.3, 0.5]}, 160), 64) <= 1e-9


def test_jacobi_checks():
    rng = np.random.default_rng(3)
    assert jacobi_minor_check(np.eye(4), [0, 1], [2, 3]) == 0
    A = np.eye(6) + 0.3 * (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    assert jacobi_minor_check(A, [1, 4], [0, 2, 3, 5]) <= 1e-10
    R = rng.standard_normal((2, 6))
    C = rng.standard_normal((6, 2))
    assert oblique_jacobi_check(A, R, C) <= 1e-10
