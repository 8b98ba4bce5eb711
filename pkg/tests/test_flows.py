import math

import numpy as np
import pytest

from bogc_tilt.flows import (TimeVector, banded_identity_residual, banded_tilt_matrices,
                             block_flow_analytic, block_flow_expanded, closure_experiment,
                             flow_rhs_K, flow_rhs_K_leibniz, flow_rhs_Y, hankel_flow_report,
                             kernel_at, kernel_flow_report, oblique_tau_value, resolvent_data,
                             sampled_rank, shift, shift_adjoint, tau_log_derivative,
                             time_factorization, universal_resolvent)
from bogc_tilt.operators import toeplitz_block
from bogc_tilt.series import factorize
from bogc_tilt.tilt import TiltFamily, tilted_minor_direct


def random_tilts(seed, N, d):
    rng = np.random.default_rng(seed)
    draw = lambda: rng.random(d + 1) + 1j * rng.random(d + 1)
    return TiltFamily.from_coefficients([draw() for _ in range(N)], [draw() for _ in range(N)])


def test_time_vector():
    t = TimeVector((0.2, 0.05))
    assert t.shifted(2, 0.01).times == (0.2, 0.060000000000000005)
    with pytest.raises(ValueError):
        TimeVector(())
    with pytest.raises(ValueError):
        TimeVector((math.nan,))


def test_shifts():
    S, Ss = shift(5, 1), shift_adjoint(5, 1)
    e0 = np.eye(5)[0]
    np.testing.assert_array_equal(S @ e0, np.eye(5)[1])
    np.testing.assert_array_equal(Ss @ e0, np.zeros(5))
    np.testing.assert_array_equal(Ss @ S, np.eye(5) - np.diag([0, 0, 0, 0, 1]))


def test_universal_resolvent_trivial_and_symmetric():
    fact = factorize({"type": "exponential", "times": []}, 64)
    np.testing.assert_allclose(universal_resolvent(fact, 3, 4, 32), np.eye(3, 4), atol=1e-15)
    fact = factorize({"type": "exponential", "times": [0.3]}, 128)
    Y = universal_resolvent(fact, 5, 5, 48)
    np.testing.assert_allclose(Y, Y.T, atol=1e-13)
    with pytest.raises(ValueError):
        universal_resolvent(fact, 30, 5, 48)


@pytest.mark.parametrize("N", [1, 2, 4])
def test_universal_resolvent_minor(N):
    fact = factorize({"type": "exponential", "times": [0.3, 0.1]}, 128)
    Y = universal_resolvent(fact, N, N, 48)
    direct = tilted_minor_direct(fact.phi, TiltFamily.trivial(N), N) / fact.geometric_mean ** N
    np.testing.assert_allclose(np.linalg.det(Y), direct, rtol=1e-10)


def test_banded_tilt_matrices():
    A_t, A_x = banded_tilt_matrices(TiltFamily.trivial(3), 3, 3, 3)
    np.testing.assert_array_equal(A_t, np.eye(3))
    np.testing.assert_array_equal(A_x, np.eye(3))
    tilts = TiltFamily.from_coefficients([[1], [0, 1]], [[1], [1]])
    _, A_x = banded_tilt_matrices(tilts, 2, 3, 3)
    np.testing.assert_array_equal(A_x[:, 1], [0, 0, 1])
    with pytest.raises(ValueError):
        banded_tilt_matrices(random_tilts(0, 3, 2), 3, 4, 4)


def test_banded_identity():
    fact = factorize({"type": "exponential", "times": [0.3]}, 128)
    lhs, rhs = banded_identity_residual(fact, random_tilts(1, 3, 2), 3, 6, 6, 48)
    assert abs(lhs - rhs) <= 1e-9 * max(1, abs(rhs))


def test_kernel_flow_zero_time():
    np.testing.assert_allclose(flow_rhs_K((0.0,), 1, 24), 0, atol=1e-15)


def test_hankel_flow():
    for t, r in (((0.3,), 1), ((0.2, 0.05), 2), ((0.2, 0.05), 1)):
        assert hankel_flow_report(t, r, 64).max_abs_error <= 1e-6


def test_kernel_flow_fd_and_leibniz():
    rep = kernel_flow_report((0.2, 0.05), 2, 48)
    assert rep.max_abs_error <= 1e-6
    np.testing.assert_allclose(flow_rhs_K((0.2, 0.05), 2, 48), flow_rhs_K_leibniz((0.2, 0.05), 2, 48),
                               atol=1e-10)
    assert set(rep.to_json()) == {"r", "fd_step", "max_abs_error", "M", "times"}


def test_fredholm_determinant_exact():
    for t in ((0.3,), (0.2, 0.05), (0.4, -0.3, 0.1)):
        K = kernel_at(t, 128)
        z = math.exp(-sum(r * x * x for r, x in enumerate(t, start=1)))
        np.testing.assert_allclose(np.linalg.det(np.eye(128) - K), z, rtol=1e-8)


def test_block_flow_zero_time():
    rep = flow_rhs_Y((0.0,), None, 3, 1, 24)
    M = 24
    R = toeplitz_block(time_factorization((0.0,), M).phi_plus, 3, M)
    expected = R @ (shift_adjoint(M, 1) + shift(M, 1)) @ R.T
    np.testing.assert_allclose(rep.analytic, expected, atol=1e-10)
    assert rep.max_abs_error <= 1e-10


@pytest.mark.parametrize("t,tilts,N,r,rect", [
    ((0.3,), None, 3, 1, None),
    ((0.2, 0.05), None, 0, 2, (5, 4)),
    ((0.2, 0.05), "random", 2, 2, None),
])
def test_block_flow_fd(t, tilts, N, r, rect):
    tilts = random_tilts(2, N, 1) if tilts == "random" else tilts
    assert flow_rhs_Y(t, tilts, N, r, 48, rectangular=rect).max_abs_error <= 1e-6


def test_telescoping():
    t, r, M = (0.2, 0.05), 2, 40
    data = resolvent_data(t, r, M)
    R = toeplitz_block(data.fact.phi_plus, 4, M)
    C = toeplitz_block(data.fact.phi_minus, M, 3)
    np.testing.assert_allclose(block_flow_analytic(R, C, data, r), block_flow_expanded(R, C, data, r),
                               atol=1e-10)


def test_tau_log_derivative():
    a, n = tau_log_derivative((0.3,), None, 0, 1, 32)
    assert a == pytest.approx(-0.6) and abs(n - a) <= 1e-6
    np.testing.assert_allclose(oblique_tau_value((0.3,), None, 0, 32), math.exp(-0.09))
    a, n = tau_log_derivative((0.3,), None, 2, 1, 48)
    assert abs(a - n) <= 1e-6
    a, n = tau_log_derivative((0.2, 0.05), random_tilts(3, 2, 1), 2, 2, 48)
    assert abs(a - n) <= 1e-6 * max(1, abs(a))


def test_sampled_rank():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((40, 3)) @ rng.standard_normal((3, 8))
    assert sampled_rank(A, 1e-7)[0] == 3
    assert sampled_rank(np.zeros((4, 4)), 1e-7)[0] == 0


def test_closure_constant_box():
    res = closure_experiment(0, N=2, d=1, sample_count=40, time_box=((0.2, 0.2),), M=32)
    for family in ("minor", "resolvent"):
        assert res[family].rank_without_shifts == 1
        assert res[family].rank_with_shifts == 1
    with pytest.raises(ValueError):
        closure_experiment(0, sample_count=10)
