import numpy as np
import pytest

from bogc_tilt import _linalg
from bogc_tilt.operators import bogc_kernel, bogc_rhs, toeplitz_det
from bogc_tilt.series import LaurentSeries, factorize
from bogc_tilt.tilt import (ConsistencyError, DegenerateChartError, TiltFamily, build_chart,
                            fixed_tail_kernel, oblique_correction, projection_chart,
                            random_tilt_family, rank_one_chart_eval, tilted_fredholm_evaluate,
                            tilted_fredholm_rhs, tilted_minor_direct)

M = 64
BESSEL = factorize({"type": "exponential", "times": [0.3]}, 2 * M + 16)
TWO_TIME = factorize({"type": "exponential", "times": [0.2, 0.05]}, 2 * M + 16)
RATIONAL = factorize({"type": "rational", "plus": [], "minus": [0.3, 0.5]}, 2 * M + 16)
ONE = factorize({"type": "exponential", "times": []}, 2 * M + 16)


def test_tilt_family_validation():
    with pytest.raises(ValueError):
        TiltFamily((LaurentSeries(-1, [1, 1]),), (LaurentSeries.constant(1),))
    with pytest.raises(ValueError):
        TiltFamily((LaurentSeries.constant(1),), (LaurentSeries(0, [1, 1]),))
    with pytest.raises(ValueError):
        TiltFamily((LaurentSeries.constant(1),), ())
    t = TiltFamily.from_coefficients([[1.0], [0.0, 1.0]], [[1.0], [1.0, -0.5]])
    assert (t.d_xi, t.d_theta) == (1, 1)
    assert t.theta[1].coeff(-1) == -0.5 and t.xi[1].coeff(1) == 1


def test_trivial_chart_has_unit_gram_determinant():
    for fact in (BESSEL, RATIONAL):
        ch = build_chart(fact, TiltFamily.trivial(4), 4, M)
        np.testing.assert_allclose(ch.Gamma, ch.R @ ch.C)
        np.testing.assert_allclose(_linalg.det(ch.Gamma), 1, atol=1e-10)


def test_column_only_chart_kills_tail():
    rng = np.random.default_rng(1)
    tilts = random_tilt_family(rng, 3, rows=False)
    ch = build_chart(BESSEL, tilts, 3, M)
    np.testing.assert_array_equal(ch.R[:, 3:], 0)


def test_monomial_tilts_give_shifted_minor():
    # Row shifts p_i = i + b_i and column shifts q_j = j + a_j cover the same index set,
    # so the chart stays nondegenerate.
    a, b = [0, 0, 1], [0, 0, 1]
    tilts = TiltFamily(tuple(LaurentSeries.monomial(k) for k in a),
                       tuple(LaurentSeries.monomial(-k) for k in b))
    phi = BESSEL.phi
    p = [i + b[i] for i in range(3)]
    q = [j + a[j] for j in range(3)]
    expected = np.linalg.det(np.array([[phi.coeff(p[i] - q[j]) for j in range(3)] for i in range(3)]))
    np.testing.assert_allclose(tilted_minor_direct(phi, tilts, 3), expected, rtol=1e-13)
    np.testing.assert_allclose(tilted_fredholm_rhs(BESSEL, tilts, 3, M), expected, rtol=1e-8)


def test_direct_minor_small_cases():
    assert tilted_minor_direct(ONE.phi, TiltFamily.trivial(1), 1) == 1
    tilts = TiltFamily.from_coefficients([[0.5, 0.2]], [[1.0, 0.3j]])
    expected = (tilts.theta[0] * tilts.xi[0] * BESSEL.phi).coeff(0)
    np.testing.assert_allclose(tilted_minor_direct(BESSEL.phi, tilts, 1), expected, rtol=1e-14)
    np.testing.assert_allclose(tilted_minor_direct(BESSEL.phi, TiltFamily.trivial(3), 3),
                               toeplitz_det(BESSEL.phi, 3), rtol=1e-14)


def test_fixed_tail_trivial_tilts():
    ftk = fixed_tail_kernel(BESSEL, TiltFamily.trivial(3), 3, M)
    K = bogc_kernel(BESSEL, M).entries
    np.testing.assert_allclose(ftk.kernel.entries, K[3:, 3:], atol=1e-15)
    assert ftk.correction_rank == 0
    np.testing.assert_array_equal(ftk.J[3:], np.eye(M - 3))


@pytest.mark.parametrize("fact", [BESSEL, TWO_TIME, RATIONAL])
def test_fixed_tail_rank_bound(fact):
    rng = np.random.default_rng(7)
    for N in (2, 4):
        for _ in range(5):
            tilts = random_tilt_family(rng, N)
            ftk = fixed_tail_kernel(fact, tilts, N, M)
            assert ftk.correction_rank <= tilts.d_xi + tilts.d_theta


def test_single_column_tilt_has_rank_one_correction():
    N = 3
    one = LaurentSeries.constant(1)
    xi = (one, one, LaurentSeries(0, [1.0, 0.4, 0.1]))
    ftk = fixed_tail_kernel(BESSEL, TiltFamily(xi, (one,) * N), N, M)
    assert ftk.correction_rank <= 1


def test_rhs_reductions():
    for N in (1, 3, 5):
        np.testing.assert_allclose(tilted_fredholm_rhs(BESSEL, TiltFamily.trivial(N), N, M),
                                   bogc_rhs(BESSEL, N, M), rtol=1e-12)
    tilts = random_tilt_family(np.random.default_rng(2), 3)
    r = tilted_fredholm_evaluate(ONE, tilts, 3, M)
    np.testing.assert_allclose(r.value, r.det_Gamma, rtol=1e-12)


def test_bessel_random_degree_two_tilts():
    rng = np.random.default_rng(11)
    fact = factorize({"type": "exponential", "times": [0.3]}, 272)
    for _ in range(5):
        draw = lambda: rng.random(3) + 1j * rng.random(3)
        tilts = TiltFamily.from_coefficients([draw() for _ in range(4)], [draw() for _ in range(4)])
        lhs = tilted_minor_direct(fact.phi, tilts, 4)
        rhs = tilted_fredholm_rhs(fact, tilts, 4, 128)
        assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_degenerate_chart_is_rejected():
    # A vanishing column tilt makes Gamma singular.
    tilts = TiltFamily((LaurentSeries(0, [0.0]), LaurentSeries.constant(1)), (LaurentSeries.constant(1),) * 2)
    with pytest.raises(DegenerateChartError):
        tilted_fredholm_evaluate(BESSEL, tilts, 2, M)


def test_oblique_projection_properties():
    rng = np.random.default_rng(5)
    tilts = random_tilt_family(rng, 3)
    ch = build_chart(TWO_TIME, tilts, 3, M)
    K = bogc_kernel(TWO_TIME, M).entries
    pi_v = np.eye(M) - ch.C @ _linalg.solve(ch.Gamma, ch.R)
    assert np.max(np.abs(pi_v @ pi_v - pi_v)) <= 1e-10
    pairs = oblique_correction(ch, K)
    assert len(pairs) == 3
    recon = K - sum(np.outer(c, p) for c, p in pairs)
    assert np.max(np.abs(pi_v @ K - recon)) <= 1e-10
    pc = projection_chart(3, M)
    pairs = oblique_correction(pc, K)
    q = np.diag([0.0] * 3 + [1.0] * (M - 3))
    np.testing.assert_allclose(K - sum(np.outer(c, p) for c, p in pairs), q @ K, atol=1e-15)


def test_rank_one_chart():
    e0 = np.eye(1, 8).ravel()
    lhs, rhs = rank_one_chart_eval(e0, e0, ONE, M)
    np.testing.assert_allclose([lhs, rhs], [1, 1], atol=1e-14)
    lhs, rhs = rank_one_chart_eval(e0, e0, BESSEL, M)
    A = np.eye(M) - bogc_kernel(BESSEL, M).entries
    np.testing.assert_allclose(lhs, _linalg.solve(A, np.eye(M))[0, 0], rtol=1e-12)
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)
    rng = np.random.default_rng(9)
    for _ in range(5):
        a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        lhs, rhs = rank_one_chart_eval(a, b, TWO_TIME, M)
        assert abs(lhs - rhs) <= 1e-8 * abs(lhs)
    # beta orthogonal to e_0 takes the null-space path.
    b = np.zeros(8, dtype=complex)
    b[1] = 1.0
    lhs, rhs = rank_one_chart_eval(np.ones(8), b, BESSEL, M)
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)
