"""Tilted charts, tilted Toeplitz minors and their Fredholm representation.

Indices follow the usual zero-based layout: the chart has ``N`` rows/columns,
operators are compressed to ``span(e_0, ..., e_{M-1})`` and the tail is the
index range ``[N, M)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _linalg
from .operators import (TruncatedOperator, WindowError, bogc_kernel, fredholm_det,
                        toeplitz_block)
from .series import LaurentSeries, SymbolFactorization, series_multiply

DEGENERATE_COND = 1e12
CROSS_CHECK_TOL = 1e-7


class DegenerateChartError(ValueError):
    """The chart's Gram matrix or its head block is numerically singular."""


class ConsistencyError(RuntimeError):
    """Two independent evaluation paths disagreed."""


@dataclass(frozen=True, eq=False)
class TiltFamily:
    """Column tilts ``xi_1..xi_N`` (powers of ``z``) and row tilts ``theta_1..theta_N`` (powers of ``1/z``)."""

    xi: tuple[LaurentSeries, ...]
    theta: tuple[LaurentSeries, ...]

    def __post_init__(self):
        xi, theta = tuple(self.xi), tuple(self.theta)
        if len(xi) != len(theta):
            raise ValueError(f"need as many column tilts as row tilts, got {len(xi)} and {len(theta)}")
        for k, f in enumerate(xi, start=1):
            if f.lo < 0 and np.any(f.coeff_range(f.lo, -1) != 0):
                raise ValueError(f"xi_{k} has negative exponents")
        for k, f in enumerate(theta, start=1):
            if f.hi > 0 and np.any(f.coeff_range(1, f.hi) != 0):
                raise ValueError(f"theta_{k} has positive exponents")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_coefficients(cls, xi: Sequence[Sequence[complex]],
                          theta: Sequence[Sequence[complex]]) -> "TiltFamily":
        """``xi[j][k]`` multiplies ``z**k``; ``theta[i][k]`` multiplies ``z**-k``."""
        xs = tuple(LaurentSeries(0, c) for c in xi)
        ts = tuple(LaurentSeries(0, c).reflect() for c in theta)
        return cls(xs, ts)

    @classmethod
    def trivial(cls, N: int) -> "TiltFamily":
        one = LaurentSeries.constant(1.0)
        return cls((one,) * N, (one,) * N)

    @property
    def N(self) -> int:
        return len(self.xi)

    @property
    def d_xi(self) -> int:
        return max((_degree(f) for f in self.xi), default=0)

    @property
    def d_theta(self) -> int:
        return max((_degree(f.reflect()) for f in self.theta), default=0)

    def xi_coefficients(self, j: int) -> np.ndarray:
        """Coefficients of ``xi_{j+1}`` at ``z**0 .. z**d``."""
        f = self.xi[j]
        return f.coeff_range(0, max(_degree(f), 0))

    def theta_coefficients(self, i: int) -> np.ndarray:
        """Coefficients of ``theta_{i+1}`` at ``z**0 .. z**-d``."""
        f = self.theta[i].reflect()
        return f.coeff_range(0, max(_degree(f), 0))

    def to_json(self) -> dict:
        enc = lambda a: [[float(c.real), float(c.imag)] for c in a]
        return {"xi": [enc(self.xi_coefficients(j)) for j in range(self.N)],
                "theta": [enc(self.theta_coefficients(i)) for i in range(self.N)]}


def _degree(f: LaurentSeries) -> int:
    sup = f.support()
    return 0 if sup is None else max(sup[1], 0)


def random_tilt_family(rng: np.random.Generator, N: int, max_degree: int = 3,
                       rows: bool = True) -> TiltFamily:
    """Polynomial tilts with degrees drawn from ``0..max_degree`` and
    coefficients uniform in the square ``[0,1] + i[0,1]``."""
    def draw():
        deg = int(rng.integers(0, max_degree + 1))
        return rng.random(deg + 1) + 1j * rng.random(deg + 1)
    xi = [draw() for _ in range(N)]
    theta = [draw() if rows else np.ones(1) for _ in range(N)]
    return TiltFamily.from_coefficients(xi, theta)


@dataclass(frozen=True, eq=False)
class Chart:
    R: np.ndarray
    C: np.ndarray
    Gamma: np.ndarray
    B: np.ndarray
    cond_Gamma: float
    cond_B: float
    clipped_tail: float = 0.0

    @property
    def N(self) -> int:
        return self.R.shape[0]

    @property
    def M(self) -> int:
        return self.R.shape[1]

    @property
    def degenerate(self) -> bool:
        return not (self.cond_Gamma <= DEGENERATE_COND and self.cond_B <= DEGENERATE_COND)

    def require_nondegenerate(self) -> None:
        if self.degenerate:
            raise DegenerateChartError(f"degenerate chart: cond(Gamma)={self.cond_Gamma:.3e}, "
                                       f"cond(B)={self.cond_B:.3e} (limit {DEGENERATE_COND:.0e})")


def xi_matrix(tilts: TiltFamily, N: int, M: int) -> tuple[np.ndarray, float]:
    """``M x N`` block of the column tilt: column ``j`` holds ``z**j xi_{j+1}``.

    Coefficients pushed past row ``M-1`` are dropped; their largest modulus is
    returned as the clipped tail.
    """
    X = np.zeros((M, N), dtype=complex)
    clipped = 0.0
    for j in range(N):
        c = tilts.xi_coefficients(j)
        keep = min(c.size, M - j)
        X[j:j + keep, j] = c[:keep]
        if keep < c.size:
            clipped = max(clipped, float(np.max(np.abs(c[keep:]))))
    return X, clipped


def theta_matrix(tilts: TiltFamily, N: int, M: int) -> tuple[np.ndarray, float]:
    """``N x M`` block of the row tilt: ``(Theta h)_i = sum_m theta_i(-m) h_{i+m}``."""
    T = np.zeros((N, M), dtype=complex)
    clipped = 0.0
    for i in range(N):
        c = tilts.theta_coefficients(i)
        keep = min(c.size, M - i)
        T[i, i:i + keep] = c[:keep]
        if keep < c.size:
            clipped = max(clipped, float(np.max(np.abs(c[keep:]))))
    return T, clipped


def build_chart(fact: SymbolFactorization, tilts: TiltFamily, N: int, M: int) -> Chart:
    """``R = Theta T(phi_+)`` and ``C = T(phi_-) Xi P_N`` on the ``M``-truncation."""
    if tilts.N != N:
        raise ValueError(f"tilt family has N={tilts.N}, expected {N}")
    if N < 1 or N >= M:
        raise ValueError(f"need 1 <= N < M, got N={N}, M={M}")
    if fact.truncation_order < M - 1:
        raise WindowError(f"factorization half_width {fact.truncation_order} < M-1 = {M - 1}")
    theta, clip_t = theta_matrix(tilts, N, M)
    xi, clip_x = xi_matrix(tilts, N, M)
    R = theta @ toeplitz_block(fact.phi_plus, M, M)
    C = toeplitz_block(fact.phi_minus, M, M) @ xi
    gamma = R @ C
    B = R[:, :N]
    return Chart(R=R, C=C, Gamma=gamma, B=B, cond_Gamma=_linalg.cond(gamma),
                 cond_B=_linalg.cond(B), clipped_tail=max(clip_t, clip_x))


def projection_chart(N: int, M: int) -> Chart:
    """The chart ``R = C = P_N`` underlying the untilted identity."""
    R = np.eye(N, M, dtype=complex)
    return Chart(R=R, C=R.T.copy(), Gamma=np.eye(N, dtype=complex), B=np.eye(N, dtype=complex),
                 cond_Gamma=1.0, cond_B=1.0)


def tilted_minor_direct(phi: LaurentSeries, tilts: TiltFamily, N: int) -> complex:
    """``det[(theta_i xi_j phi)_{i-j}]`` from explicit three-series convolutions."""
    if tilts.N != N:
        raise ValueError(f"tilt family has N={tilts.N}, expected {N}")
    if N == 0:
        return 1.0 + 0j
    dx, dt = tilts.d_xi, tilts.d_theta
    lo, hi = -(N - 1) - dx, N - 1 + dt
    if phi.lo > lo or phi.hi < hi:
        raise WindowError(f"symbol window [{phi.lo}, {phi.hi}] does not cover [{lo}, {hi}]")
    D = np.empty((N, N), dtype=complex)
    for j in range(N):
        u = series_multiply(tilts.xi[j], phi, (-(N - 1), N - 1 + dt))
        for i in range(N):
            D[i, j] = series_multiply(tilts.theta[i], u, (i - j, i - j)).coeff(i - j)
    return _linalg.det(D)


@dataclass(frozen=True, eq=False)
class FixedTailKernel:
    kernel: TruncatedOperator
    correction: np.ndarray
    correction_rank: int
    singular_values: np.ndarray
    rank_threshold: float
    J: np.ndarray


def fixed_tail_kernel(fact: SymbolFactorization, tilts: TiltFamily, N: int, M: int,
                      chart: Chart | None = None, K: np.ndarray | None = None) -> FixedTailKernel:
    """Oblique kernel conjugated onto the tail ``[N, M)``.

    ``J = Q - P B^{-1} R Q`` maps the tail isomorphically onto ``ker R`` and
    the returned kernel is ``Q (I - C Gamma^{-1} R) K J``. The correction
    ``F = kernel - QKQ`` has its numerical rank counted at ``1e-9 ||K||``.
    """
    chart = build_chart(fact, tilts, N, M) if chart is None else chart
    chart.require_nondegenerate()
    K = bogc_kernel(fact, M).entries if K is None else np.asarray(K)
    return _fixed_tail_from_chart(chart, K)


def _fixed_tail_from_chart(chart: Chart, K: np.ndarray) -> FixedTailKernel:
    R, C, gamma, B = chart.R, chart.C, chart.Gamma, chart.B
    N, M = chart.N, chart.M
    tail = M - N
    J = np.zeros((M, tail), dtype=complex)
    J[N:, :] = np.eye(tail)
    J[:N, :] -= _linalg.solve(B, R[:, N:])
    KJ = K @ J
    kernel = KJ[N:, :] - C[N:, :] @ _linalg.solve(gamma, R @ KJ)
    F = kernel - K[N:, N:]
    threshold = 1e-9 * float(np.linalg.norm(K, 2)) if K.size else 0.0
    rank, sv = _linalg.numerical_rank(F, threshold)
    return FixedTailKernel(kernel=TruncatedOperator(kernel, "K_N fixed tail"), correction=F,
                           correction_rank=rank, singular_values=sv, rank_threshold=threshold, J=J)


def null_space_oblique_det(chart: Chart, K: np.ndarray) -> complex:
    """``det(I - Pi_V K)`` on ``ker R``, restricted through an orthonormal QR basis."""
    V = _linalg.null_space_qr(chart.R)
    pik = K - chart.C @ _linalg.solve(chart.Gamma, chart.R @ K)
    restricted = V.conj().T @ pik @ V
    return _linalg.det(np.eye(V.shape[1]) - restricted)


@dataclass(frozen=True)
class TiltedRHS:
    value: complex
    det_Gamma: complex
    tail_det: complex
    null_space_det: complex
    correction_rank: int
    cond_Gamma: float
    cond_B: float


def tilted_fredholm_evaluate(fact: SymbolFactorization, tilts: TiltFamily, N: int, M: int,
                             K: np.ndarray | None = None) -> TiltedRHS:
    """``G^N Z det(Gamma) det(I - K_N)`` together with its diagnostics."""
    chart = build_chart(fact, tilts, N, M)
    chart.require_nondegenerate()
    K = bogc_kernel(fact, M).entries if K is None else np.asarray(K)
    ftk = _fixed_tail_from_chart(chart, K)
    tail = fredholm_det(ftk.kernel).value
    cross = null_space_oblique_det(chart, K)
    if _linalg.rel_err(tail, cross) > CROSS_CHECK_TOL:
        raise ConsistencyError(f"fixed-tail determinant {tail} and null-space determinant {cross} "
                               f"disagree beyond {CROSS_CHECK_TOL}")
    dg = _linalg.det(chart.Gamma)
    value = cmath.exp(N * cmath.log(fact.geometric_mean) + fact.log_szego_Z) * dg * tail
    return TiltedRHS(value=value, det_Gamma=dg, tail_det=tail, null_space_det=cross,
                     correction_rank=ftk.correction_rank, cond_Gamma=chart.cond_Gamma,
                     cond_B=chart.cond_B)


def tilted_fredholm_rhs(fact: SymbolFactorization, tilts: TiltFamily, N: int, M: int) -> complex:
    return tilted_fredholm_evaluate(fact, tilts, N, M).value


def oblique_tau(fact: SymbolFactorization, tilts: TiltFamily, N: int, M: int) -> complex:
    """``det(Gamma) det(I - Pi_V K)``, i.e. the right side without ``G^N Z``."""
    r = tilted_fredholm_evaluate(fact, tilts, N, M)
    return r.det_Gamma * r.tail_det


def oblique_correction(chart: Chart, K: TruncatedOperator | np.ndarray,
                       tol: float = 1e-10) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs ``(c_a, psi_a)`` with ``Pi_V K = K - sum_a c_a psi_a^T``.

    ``c_a`` is column ``a`` of ``C`` and ``psi_a`` is row ``a`` of
    ``Gamma^{-1} R K``. The reconstruction is checked against a direct
    application of ``Pi_V``.
    """
    if _linalg.cond(chart.Gamma) > DEGENERATE_COND:
        raise DegenerateChartError(f"Gamma is numerically singular (cond={chart.cond_Gamma:.3e})")
    K = K.entries if isinstance(K, TruncatedOperator) else np.asarray(K, dtype=complex)
    rows = _linalg.solve(chart.Gamma, chart.R @ K)
    pairs = [(chart.C[:, a].copy(), rows[a].copy()) for a in range(chart.N)]
    M = K.shape[0]
    pi_v = np.eye(M) - chart.C @ _linalg.solve(chart.Gamma, chart.R)
    direct = pi_v @ K
    recon = K - sum(np.outer(c, p) for c, p in pairs)
    scale = max(1.0, float(np.max(np.abs(K))))
    resid = float(np.max(np.abs(direct - recon)))
    if resid > tol * scale:
        raise ConsistencyError(f"oblique correction reconstruction residual {resid:.3e}")
    return pairs


def rank_one_chart_eval(alpha: np.ndarray, beta: np.ndarray, fact: SymbolFactorization,
                        M: int, K: np.ndarray | None = None) -> tuple[complex, complex]:
    """``beta^* A^{-1} alpha`` computed by a solve and through the rank-one fixed-tail kernel.

    The kernel on the tail ``[1, M)`` is
    ``Q K Q - Q K e_0 beta^*/(beta^* e_0) - Q alpha beta^* K J / (beta^* alpha)``
    with ``J y = y - (beta^* y / beta^* e_0) e_0``. When ``beta^* e_0 = 0`` the
    null-space path is used instead.
    """
    a = np.zeros(M, dtype=complex)
    b = np.zeros(M, dtype=complex)
    alpha, beta = np.asarray(alpha, dtype=complex), np.asarray(beta, dtype=complex)
    a[:alpha.size], b[:beta.size] = alpha[:M], beta[:M]
    K = bogc_kernel(fact, M).entries if K is None else np.asarray(K)
    A = np.eye(M) - K
    lhs = np.vdot(b, _linalg.solve(A, a))
    ba = np.vdot(b, a)
    if ba == 0:
        raise DegenerateChartError("beta^* alpha = 0")
    Z = cmath.exp(fact.log_szego_Z)
    be0 = b[0].conjugate()
    if abs(be0) > 1e-12 * np.linalg.norm(b):
        bstar_tail = b[1:].conj()
        J = np.zeros((M, M - 1), dtype=complex)
        J[1:, :] = np.eye(M - 1)
        J[0, :] = -bstar_tail / be0
        term1 = K[1:, 1:]
        term2 = np.outer(K[1:, 0], bstar_tail) / be0
        term3 = np.outer(a[1:], b.conj() @ (K @ J)) / ba
        kern = term1 - term2 - term3
        det_tail = fredholm_det(kern).value
    else:
        chart = Chart(R=b.conj()[None, :], C=a[:, None], Gamma=np.array([[ba]]),
                      B=np.array([[be0]]), cond_Gamma=1.0, cond_B=np.inf)
        det_tail = null_space_oblique_det(chart, K)
    return complex(lhs), complex(Z * ba * det_tail)
