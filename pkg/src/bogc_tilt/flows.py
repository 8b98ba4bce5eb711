"""Time flows of symmetric exponential symbols and the resolvent blocks they move.

For ``phi = exp(sum_r t_r (z**r + z**-r))`` the kernel is ``K = H(b) H(b)^T``
with ``b = exp(sum_r t_r (z**-r - z**r))``. The functions here assemble the
closed-form ``t_r``-derivatives of ``H(b)``, ``K`` and the resolvent blocks
``R Q C`` (``Q = (I - K)^{-1}``) and compare them with finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import _linalg
from .operators import bogc_kernel, hankel_block, toeplitz_block
from .series import SymbolFactorization, make_exponential_symbol, series_log_split
from .tilt import TiltFamily, build_chart, tilted_minor_direct

FD_RELATIVE_STEP = 1e-4


@dataclass(frozen=True)
class TimeVector:
    times: tuple[float, ...]

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        if not ts:
            raise ValueError("TimeVector needs at least one time")
        if not all(math.isfinite(t) for t in ts):
            raise ValueError("times must be finite")
        object.__setattr__(self, "times", ts)

    def __len__(self) -> int:
        return len(self.times)

    def shifted(self, r: int, h: float) -> "TimeVector":
        ts = list(self.times)
        ts[r - 1] += h
        return TimeVector(tuple(ts))


def _times(t) -> TimeVector:
    return t if isinstance(t, TimeVector) else TimeVector(tuple(t))


def time_factorization(t, M: int) -> SymbolFactorization:
    """Factorization with enough stored coefficients for ``M x M`` kernels."""
    t = _times(t)
    hw = max(2 * M + 16, 2 * len(t))
    return series_log_split(make_exponential_symbol(t.times, hw), hw)


@dataclass(frozen=True, eq=False)
class FlowReport:
    r: int
    analytic: np.ndarray
    numeric: np.ndarray
    max_abs_error: float
    fd_step: float
    M: int = 0
    times: tuple[float, ...] = field(default=())

    def to_json(self) -> dict:
        return {"r": self.r, "fd_step": self.fd_step, "max_abs_error": self.max_abs_error,
                "M": self.M, "times": list(self.times)}


def fd_step(t: TimeVector, r: int) -> float:
    return FD_RELATIVE_STEP * max(1.0, abs(t.times[r - 1]))


def richardson_derivative(f: Callable[[TimeVector], np.ndarray], t: TimeVector, r: int,
                          h: float | None = None) -> tuple[np.ndarray, float]:
    """Central differences at ``h`` and ``h/2`` combined by one Richardson step."""
    h = fd_step(t, r) if h is None else h

    def central(step):
        return (np.asarray(f(t.shifted(r, step))) - np.asarray(f(t.shifted(r, -step)))) / (2 * step)

    d1, d2 = central(h), central(h / 2)
    return (4 * d2 - d1) / 3, h


def shift(E: int, r: int) -> np.ndarray:
    """``S**r`` on ``E`` coordinates: ``S e_k = e_{k+1}``."""
    return np.eye(E, k=-r)


def shift_adjoint(E: int, r: int) -> np.ndarray:
    """``(S*)**r``: ``S* e_k = e_{k-1}``, ``S* e_0 = 0``."""
    return np.eye(E, k=r)


def rho_vectors(fact: SymbolFactorization, r: int, length: int) -> np.ndarray:
    """Rows ``rho_a[l] = b_{l+a+1-r}`` for ``a = 0..r-1``."""
    out = np.empty((r, length), dtype=complex)
    for a in range(r):
        out[a] = fact.b.coeff_range(a + 1 - r, a + length - r)
    return out


def h_vectors(fact: SymbolFactorization, r: int, E: int) -> np.ndarray:
    """Rows ``h_a = H(b) rho_a``, with the inner index summed over the full stored window."""
    inner = fact.truncation_order
    hb = hankel_block(fact.b, E, inner)
    return (hb @ rho_vectors(fact, r, inner).T).T


def hankel_flow_rhs(fact: SymbolFactorization, r: int, E: int) -> np.ndarray:
    """``(S*)^r H - S^r H - sum_a e_a rho_a^T`` on an ``E x E`` block (exact, no edge loss)."""
    H_ext = hankel_block(fact.b, E + r, E)
    up = H_ext[r:E + r]
    down = np.zeros((E, E), dtype=complex)
    down[r:] = H_ext[:E - r]
    rho = rho_vectors(fact, r, E)
    boundary = np.zeros((E, E), dtype=complex)
    boundary[:r] = rho
    return up - down - boundary


def flow_rhs_K(t, r: int, M: int, pad: int | None = None) -> np.ndarray:
    """Closed-form ``d K / d t_r`` on the ``M x M`` compression.

    The shifts are applied on a larger compression (``M + pad``) and the result
    is cropped, so rows and columns near ``M`` see the true neighbouring entries.
    """
    t = _times(t)
    if not 1 <= r <= len(t):
        raise ValueError(f"r must lie in 1..{len(t)}")
    pad = r if pad is None else pad
    E = M + pad
    fact = time_factorization(t, E)
    K = bogc_kernel(fact, E).entries
    Sr, Ssr = shift(E, r), shift_adjoint(E, r)
    h = h_vectors(fact, r, E)
    boundary = np.zeros((E, E), dtype=complex)
    for a in range(r):
        ea = np.zeros(E)
        ea[a] = 1.0
        boundary += np.outer(ea, h[a]) + np.outer(h[a], ea)
    out = Ssr @ K - Sr @ K + K @ Sr - K @ Ssr - boundary
    return out[:M, :M]


def flow_rhs_K_leibniz(t, r: int, M: int) -> np.ndarray:
    """``(dH) H^T + H (dH)^T`` from the Hankel flow, on the same compression as :func:`flow_rhs_K`."""
    t = _times(t)
    E = M + r
    fact = time_factorization(t, E)
    inner = fact.truncation_order
    H = hankel_block(fact.b, E, inner)
    H_ext = hankel_block(fact.b, E + r, inner)
    dH = np.zeros_like(H)
    dH += H_ext[r:E + r]
    dH[r:] -= H_ext[:E - r]
    dH[:r] -= rho_vectors(fact, r, inner)
    return (dH @ H.T + H @ dH.T)[:M, :M]


def kernel_at(t, M: int) -> np.ndarray:
    t = _times(t)
    return bogc_kernel(time_factorization(t, M), M).entries


@dataclass(frozen=True, eq=False)
class ResolventData:
    """Resolvent pieces shared by the block flows at one time."""

    fact: SymbolFactorization
    K: np.ndarray
    Q: np.ndarray
    h: np.ndarray


def resolvent_data(t, r: int, M: int) -> ResolventData:
    t = _times(t)
    fact = time_factorization(t, M)
    K = bogc_kernel(fact, M).entries
    Q = _linalg.solve(np.eye(M) - K, np.eye(M))
    return ResolventData(fact, K, Q, h_vectors(fact, r, M))


def _chart_maps(fact: SymbolFactorization, M: int, tilts: TiltFamily | None, N: int,
                rectangular: tuple[int, int] | None) -> tuple[np.ndarray, np.ndarray]:
    if rectangular is not None:
        m, n = rectangular
        return toeplitz_block(fact.phi_plus, m, M), toeplitz_block(fact.phi_minus, M, n)
    tilts = TiltFamily.trivial(N) if tilts is None else tilts
    ch = build_chart(fact, tilts, N, M)
    return ch.R, ch.C


def block_Y(t, M: int, tilts: TiltFamily | None = None, N: int = 0,
            rectangular: tuple[int, int] | None = None) -> np.ndarray:
    """``R Q C`` for the tilted chart, or ``R_m Q C_n`` when ``rectangular=(m, n)``."""
    t = _times(t)
    fact = time_factorization(t, M)
    K = bogc_kernel(fact, M).entries
    R, C = _chart_maps(fact, M, tilts, N, rectangular)
    return R @ _linalg.solve(np.eye(M) - K, C)


def block_flow_terms(R: np.ndarray, C: np.ndarray, data: ResolventData, r: int) -> dict:
    """The individual resolvent quantities entering the block flow."""
    M = data.Q.shape[0]
    Q = data.Q
    RQ = R @ Q
    QC = Q @ C
    return {
        "shift_row": R @ shift_adjoint(M, r) @ QC,
        "shift_col": RQ @ shift(M, r) @ C,
        "RQe": RQ[:, :r],
        "RQh": RQ @ data.h[:r].T,
        "eQC": QC[:r, :],
        "hQC": data.h[:r] @ QC,
        "Y": R @ QC,
    }


def block_flow_analytic(R: np.ndarray, C: np.ndarray, data: ResolventData, r: int) -> np.ndarray:
    q = block_flow_terms(R, C, data, r)
    out = q["shift_row"] + q["shift_col"]
    for a in range(r):
        out = out - np.outer(q["RQe"][:, a], q["hQC"][a]) - np.outer(q["RQh"][:, a], q["eQC"][a])
    return out


def block_flow_expanded(R: np.ndarray, C: np.ndarray, data: ResolventData, r: int) -> np.ndarray:
    """``R S^r Q C + R Q (S*)^r C + R Q (dK) Q C`` before the pure-shift terms telescope."""
    M = data.Q.shape[0]
    Q, K = data.Q, data.K
    Sr, Ssr = shift(M, r), shift_adjoint(M, r)
    boundary = np.zeros((M, M), dtype=complex)
    for a in range(r):
        boundary[a] += data.h[a]
        boundary[:, a] += data.h[a]
    dK = Ssr @ K - Sr @ K + K @ Sr - K @ Ssr - boundary
    return R @ Sr @ Q @ C + R @ Q @ Ssr @ C + R @ Q @ dK @ Q @ C


def flow_rhs_Y(t, tilts: TiltFamily | None, N: int, r: int, M: int,
               rectangular: tuple[int, int] | None = None) -> FlowReport:
    """Closed-form ``d Y / d t_r`` against Richardson-extrapolated central differences."""
    t = _times(t)
    if not 1 <= r <= len(t):
        raise ValueError(f"r must lie in 1..{len(t)}")
    data = resolvent_data(t, r, M)
    R, C = _chart_maps(data.fact, M, tilts, N, rectangular)
    analytic = block_flow_analytic(R, C, data, r)
    numeric, h = richardson_derivative(lambda s: block_Y(s, M, tilts, N, rectangular), t, r)
    err = float(np.max(np.abs(analytic - numeric)))
    return FlowReport(r=r, analytic=analytic, numeric=numeric, max_abs_error=err, fd_step=h,
                      M=M, times=t.times)


def hankel_flow_report(t, r: int, M: int) -> FlowReport:
    t = _times(t)
    fact = time_factorization(t, M)
    analytic = hankel_flow_rhs(fact, r, M)
    numeric, h = richardson_derivative(
        lambda s: hankel_block(time_factorization(s, M).b, M, M), t, r)
    return FlowReport(r=r, analytic=analytic, numeric=numeric,
                      max_abs_error=float(np.max(np.abs(analytic - numeric))), fd_step=h,
                      M=M, times=t.times)


def kernel_flow_report(t, r: int, M: int) -> FlowReport:
    t = _times(t)
    analytic = flow_rhs_K(t, r, M)
    numeric, h = richardson_derivative(lambda s: kernel_at(s, M), t, r)
    return FlowReport(r=r, analytic=analytic, numeric=numeric,
                      max_abs_error=float(np.max(np.abs(analytic - numeric))), fd_step=h,
                      M=M, times=t.times)


def universal_resolvent(fact: SymbolFactorization, m: int, n: int, M: int) -> np.ndarray:
    """``Y^{m,n} = R_m (I - K)^{-1} C_n`` with ``R_m``, ``C_n`` the leading rows of
    ``T(phi_+)`` and leading columns of ``T(phi_-)``."""
    if 2 * max(m, n) > M:
        raise ValueError(f"need m, n <= M/2, got m={m}, n={n}, M={M}")
    K = bogc_kernel(fact, M).entries
    A = np.eye(M) - K
    if _linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("I - K is numerically singular at this truncation")
    R = toeplitz_block(fact.phi_plus, m, M)
    C = toeplitz_block(fact.phi_minus, M, n)
    return R @ _linalg.solve(A, C)


def banded_tilt_matrices(tilts: TiltFamily, N: int, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(A_theta)_{i,p} = theta_i(i-1-p)`` (``N x m``) and ``(A_xi)_{q,j} = xi_j(q-j+1)`` (``n x N``)."""
    if tilts.d_xi > n - N or tilts.d_theta > m - N:
        raise ValueError(f"degree bounds violated: d_xi={tilts.d_xi} > n-N={n - N} "
                         f"or d_theta={tilts.d_theta} > m-N={m - N}")
    A_theta = np.zeros((N, m), dtype=complex)
    A_xi = np.zeros((n, N), dtype=complex)
    for i in range(N):
        c = tilts.theta_coefficients(i)
        A_theta[i, i:i + c.size] = c
    for j in range(N):
        c = tilts.xi_coefficients(j)
        A_xi[j:j + c.size, j] = c
    return A_theta, A_xi


def banded_identity_residual(fact: SymbolFactorization, tilts: TiltFamily, N: int, m: int,
                             n: int, M: int) -> tuple[complex, complex]:
    """``det(A_theta Y A_xi)`` and ``G^{-N} D_N`` from the direct minor."""
    A_theta, A_xi = banded_tilt_matrices(tilts, N, m, n)
    Y = universal_resolvent(fact, m, n, M)
    lhs = _linalg.det(A_theta @ Y @ A_xi)
    rhs = tilted_minor_direct(fact.phi, tilts, N) / fact.geometric_mean ** N
    return complex(lhs), complex(rhs)


def oblique_tau_value(t, tilts: TiltFamily | None, N: int, M: int) -> complex:
    """``Z_t^{-1} det(R Q C)``; the empty chart gives ``Z_t^{-1}``."""
    t = _times(t)
    inv_z = math.exp(-sum(r * x * x for r, x in enumerate(t.times, start=1)))
    if N == 0:
        return complex(inv_z)
    return inv_z * _linalg.det(block_Y(t, M, tilts, N))


def tau_log_derivative(t, tilts: TiltFamily | None, N: int, r: int, M: int) -> tuple[complex, complex]:
    """``d log T / d t_r`` as ``-2 r t_r + tr(Y^{-1} dY)`` and by finite differences of ``T``."""
    t = _times(t)
    base = -2.0 * r * t.times[r - 1]
    if N == 0:
        numeric, _ = richardson_derivative(lambda s: np.log(oblique_tau_value(s, None, 0, M)), t, r)
        return complex(base), complex(numeric)
    data = resolvent_data(t, r, M)
    R, C = _chart_maps(data.fact, M, tilts, N, None)
    Y = R @ data.Q @ C
    if _linalg.cond(Y) > 1e12:
        raise np.linalg.LinAlgError("Y is numerically singular")
    dY = block_flow_analytic(R, C, data, r)
    analytic = base + np.trace(_linalg.solve(Y, dY))
    tau0 = oblique_tau_value(t, tilts, N, M)
    dtau, _ = richardson_derivative(lambda s: oblique_tau_value(s, tilts, N, M), t, r)
    return complex(analytic), complex(dtau / tau0)


def _all_minors(B: np.ndarray, must_touch: tuple[int, int] | None = None) -> list[complex]:
    """Every square minor of ``B``; with ``must_touch=(row, col)`` only those using that row or column."""
    out = []
    for k in range(1, min(B.shape) + 1):
        for rows in combinations(range(B.shape[0]), k):
            for cols in combinations(range(B.shape[1]), k):
                if must_touch is not None and must_touch[0] not in rows and must_touch[1] not in cols:
                    continue
                out.append(_linalg.det(B[np.ix_(rows, cols)]))
    return out


def _minor_derivatives(B: np.ndarray, dB: np.ndarray) -> list[complex]:
    """Directional derivatives of every square minor of ``B`` along ``dB`` (column replacement)."""
    out = []
    for k in range(1, min(B.shape) + 1):
        for rows in combinations(range(B.shape[0]), k):
            for cols in combinations(range(B.shape[1]), k):
                S = B[np.ix_(rows, cols)]
                dS = dB[np.ix_(rows, cols)]
                total = 0j
                for c in range(k):
                    S2 = S.copy()
                    S2[:, c] = dS[:, c]
                    total += _linalg.det(S2)
                out.append(total)
    return out


def closure_tilts(rng: np.random.Generator, N: int, d: int) -> TiltFamily:
    """Tilts of exact degree ``d`` with coefficients uniform in the unit square."""
    draw = lambda: rng.random(d + 1) + 1j * rng.random(d + 1)
    return TiltFamily.from_coefficients([draw() for _ in range(N)], [draw() for _ in range(N)])


def closure_quantities(t, tilts: TiltFamily, N: int, d: int, M: int) -> dict[str, list[complex]]:
    """Sampled quantities of the closure experiment at one time vector.

    ``minor`` family: all minors of ``A_theta Y A_xi`` and their ``t_r``
    derivatives; the shifted set adds, for each time, the minors of the block
    enlarged by the last row of ``A_theta R_m (S*)^r Q C_n A_xi`` and the last
    column of ``A_theta R_m Q S^r C_n A_xi``.

    ``resolvent`` family: ``Y``, ``R_m Q e_a``, ``R_m Q h_a``, ``e_a^T Q C_n`` and
    ``h_a^T Q C_n``; the shifted set adds ``R_m (S*)^r Q C_n`` and ``R_m Q S^r C_n``.
    """
    t = _times(t)
    m = n = N + d
    A_theta, A_xi = banded_tilt_matrices(tilts, N, m, n)
    fact = time_factorization(t, M)
    K = bogc_kernel(fact, M).entries
    Q = _linalg.solve(np.eye(M) - K, np.eye(M))
    R = toeplitz_block(fact.phi_plus, m, M)
    C = toeplitz_block(fact.phi_minus, M, n)
    RQ, QC = R @ Q, Q @ C
    Y = RQ @ C
    B = A_theta @ Y @ A_xi
    minor_base = _all_minors(B)
    minor_deriv: list[complex] = []
    minor_shift: list[complex] = []
    res_base = list(Y.ravel())
    res_shift: list[complex] = []
    for r in range(1, len(t) + 1):
        h = h_vectors(fact, r, M)
        Sr, Ssr = shift(M, r), shift_adjoint(M, r)
        Yr = R @ Ssr @ QC
        Yc = RQ @ Sr @ C
        dY = Yr + Yc
        for a in range(r):
            dY = dY - np.outer(RQ[:, a], h[a] @ QC) - np.outer(RQ @ h[a], QC[a])
            res_base += list(RQ[:, a]) + list(RQ @ h[a]) + list(QC[a]) + list(h[a] @ QC)
        minor_deriv += _minor_derivatives(B, A_theta @ dY @ A_xi)
        ext = np.zeros((N + 1, N + 1), dtype=complex)
        ext[:N, :N] = B
        ext[N, :N] = (A_theta @ Yr @ A_xi)[N - 1]
        ext[:N, N] = (A_theta @ Yc @ A_xi)[:, N - 1]
        ext[N, N] = (A_theta @ R @ Ssr @ Q @ Sr @ C @ A_xi)[N - 1, N - 1]
        minor_shift += _all_minors(ext, must_touch=(N, N))
        res_shift += list(Yr.ravel()) + list(Yc.ravel())
    return {"minor": minor_base + minor_deriv, "minor_shifted": minor_shift,
            "resolvent": res_base, "resolvent_shifted": res_shift}


def sampled_rank(samples: np.ndarray, rel_threshold: float) -> tuple[int, np.ndarray]:
    """Numerical column rank of a samples-by-quantities matrix.

    Each quantity column is scaled to unit norm first (identically zero columns
    are left alone) so that the threshold is not dominated by magnitude.
    """
    A = np.asarray(samples, dtype=complex)
    norms = np.linalg.norm(A, axis=0)
    A = A / np.where(norms > 0, norms, 1.0)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.count_nonzero(s > rel_threshold * s[0])), s


@dataclass(frozen=True, eq=False)
class ClosureResult:
    family: str
    rank_without_shifts: int
    rank_with_shifts: int
    singular_values_without: np.ndarray
    singular_values_with: np.ndarray
    quantity_counts: tuple[int, int]
    time_box: tuple[tuple[float, float], ...]
    sample_count: int
    rel_threshold: float
    seed: int

    def to_json(self) -> dict:
        return {"family": self.family, "rank_without": self.rank_without_shifts,
                "rank_with": self.rank_with_shifts,
                "singular_values_without": [float(x) for x in self.singular_values_without],
                "singular_values_with": [float(x) for x in self.singular_values_with],
                "quantities_without": self.quantity_counts[0],
                "quantities_with": self.quantity_counts[1],
                "time_box": [list(b) for b in self.time_box], "sample_count": self.sample_count,
                "rel_threshold": self.rel_threshold, "seed": self.seed}


DEFAULT_TIME_BOX = ((0.1, 0.5), (0.05, 0.25))


def closure_experiment(seed: int, N: int = 3, d: int = 2, sample_count: int = 40,
                       time_box: Sequence[Sequence[float]] = DEFAULT_TIME_BOX, M: int = 48,
                       rel_threshold: float = 1e-7) -> dict[str, ClosureResult]:
    """Ranks of the sampled closure quantities with and without the boundary-shifted ones.

    Tilts and sample times come from one seeded generator; times are uniform in
    ``time_box`` (one interval per time). Returns results for both the minor
    and the resolvent families.
    """
    if sample_count < 40:
        raise ValueError("sample_count must be at least 40")
    box = tuple((float(a), float(b)) for a, b in time_box)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tilts = closure_tilts(rng, N, d)
    lows = np.array([a for a, _ in box])
    highs = np.array([b for _, b in box])
    rows: dict[str, list[list[complex]]] = {}
    for _ in range(sample_count):
        t = lows + (highs - lows) * rng.random(len(box))
        for key, vals in closure_quantities(tuple(t), tilts, N, d, M).items():
            rows.setdefault(key, []).append(vals)
    out = {}
    for family in ("minor", "resolvent"):
        base = np.array(rows[family])
        full = np.hstack([base, np.array(rows[family + "_shifted"])])
        r0, s0 = sampled_rank(base, rel_threshold)
        r1, s1 = sampled_rank(full, rel_threshold)
        out[family] = ClosureResult(family, r0, r1, s0, s1, (base.shape[1], full.shape[1]), box,
                                    sample_count, rel_threshold, seed)
    return out
