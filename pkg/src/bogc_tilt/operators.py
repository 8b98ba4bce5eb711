"""Truncated Toeplitz and Hankel operators, the BOGC kernel and Fredholm determinants."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from . import _linalg
from .series import LaurentSeries, SymbolFactorization


class WindowError(ValueError):
    """A series does not cover the coefficients an operator needs."""


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """An operator on ``l^2`` compressed to ``span(e_0, ..., e_{M-1})``."""

    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"TruncatedOperator needs a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("TruncatedOperator entries must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class FredholmResult:
    value: complex
    truncation_size: int
    doubling_delta: float
    log_abs: float = 0.0
    phase: complex = 1.0 + 0j


def _require(f: LaurentSeries, lo: int, hi: int, what: str) -> None:
    # A one-sided series is exactly zero on the other side, so only the
    # sides it actually extends into are treated as truncations.
    if (f.lo < 0 and f.lo > lo) or (f.hi > 0 and f.hi < hi):
        raise WindowError(f"{what} needs exponents [{lo}, {hi}] but the series covers [{f.lo}, {f.hi}]")


def toeplitz_matrix(f: LaurentSeries, M: int, label: str = "T") -> TruncatedOperator:
    """``T(f)_{ij} = f_{i-j}`` for ``0 <= i, j < M``."""
    _require(f, -(M - 1), M - 1, "toeplitz_matrix")
    col = f.coeff_range(0, M - 1)
    row = f.coeff_range(-(M - 1), 0)[::-1]
    return TruncatedOperator(sla.toeplitz(col, row), label)


def toeplitz_block(f: LaurentSeries, rows: int, cols: int) -> np.ndarray:
    """Rectangular block ``f_{i-j}``, zero outside the stored window."""
    col = f.coeff_range(0, rows - 1)
    row = f.coeff_range(-(cols - 1), 0)[::-1]
    return sla.toeplitz(col, row)


def hankel_block(f: LaurentSeries, rows: int, cols: int) -> np.ndarray:
    """Rectangular block ``f_{i+j+1}``, zero outside the stored window."""
    vals = f.coeff_range(1, rows + cols - 1)
    return sla.hankel(vals[:rows], vals[rows - 1:rows + cols - 1])


def hankel_matrix(f: LaurentSeries, M: int, label: str = "H") -> TruncatedOperator:
    """``H(f)_{ij} = f_{i+j+1}`` for ``0 <= i, j < M``."""
    _require(f, 1, 2 * M - 1, "hankel_matrix")
    return TruncatedOperator(hankel_block(f, M, M), label)


def bogc_kernel(fact: SymbolFactorization, M: int) -> TruncatedOperator:
    """``K = H(b) H(c_tilde)`` compressed to ``M x M``.

    The inner index of the product runs over every coefficient stored in the
    factorization, so only the outer compression truncates.
    """
    m = fact.truncation_order
    if m < 2 * M:
        raise WindowError(f"bogc_kernel needs half_width >= 2M = {2 * M}, got {m}")
    inner = m
    hb = hankel_block(fact.b, M, inner)
    hc = hankel_block(fact.c_tilde, inner, M)
    k = hb @ hc
    if fact.symmetric:
        k = 0.5 * (k + k.T)
    return TruncatedOperator(k, "K")


def fredholm_det(op: TruncatedOperator | np.ndarray, row_col_start: int = 0) -> FredholmResult:
    """``det(I - op)`` on the indices ``[row_col_start, size)``.

    ``doubling_delta`` compares with the same determinant on the first half of
    that index range.
    """
    a = op.entries if isinstance(op, TruncatedOperator) else np.asarray(op, dtype=complex)
    size = a.shape[0]
    if not 0 <= row_col_start < size:
        raise ValueError(f"row_col_start={row_col_start} outside [0, {size})")
    tail = a[row_col_start:, row_col_start:]
    n = tail.shape[0]
    full = _linalg.lu_logdet(np.eye(n) - tail)
    half_n = max(n // 2, 1)
    half = _linalg.lu_logdet(np.eye(half_n) - tail[:half_n, :half_n]).value
    return FredholmResult(value=full.value, truncation_size=n,
                          doubling_delta=float(abs(full.value - half)),
                          log_abs=full.log_abs, phase=full.phase)


def toeplitz_det(phi: LaurentSeries, N: int) -> complex:
    """Direct ``N x N`` Toeplitz determinant ``det[phi_{i-j}]``."""
    if N == 0:
        return 1.0 + 0j
    return _linalg.det(toeplitz_matrix(phi, N).entries)


def szego_Z(fact: SymbolFactorization) -> complex:
    return fact.szego_Z


def bogc_rhs(fact: SymbolFactorization, N: int, M: int, kernel: TruncatedOperator | None = None) -> complex:
    """``G^N Z det(I - K)`` with the determinant taken on the tail ``i, j >= N``."""
    k = bogc_kernel(fact, M) if kernel is None else kernel
    fd = fredholm_det(k, N)
    if fd.phase == 0:
        return 0j
    log_val = N * cmath.log(fact.geometric_mean) + fact.log_szego_Z + fd.log_abs
    return cmath.exp(log_val) * fd.phase


def verify_wh_identity(fact: SymbolFactorization, M: int) -> float:
    """Max-norm residual of ``T(phi) = G T(phi_+) (I - K)^{-1} T(phi_-)`` on the top-left quarter."""
    if 2 * M > fact.truncation_order:
        raise WindowError(f"verify_wh_identity needs M <= half_width/2, got M={M}, "
                          f"half_width={fact.truncation_order}")
    k = bogc_kernel(fact, M).entries
    a = np.eye(M) - k
    if _linalg.cond(a) > 1e14:
        raise np.linalg.LinAlgError("I - K is not invertible at this truncation")
    tp = toeplitz_matrix(fact.phi_plus, M).entries
    tm = toeplitz_matrix(fact.phi_minus, M).entries
    rhs = fact.geometric_mean * (tp @ _linalg.solve(a, tm))
    lhs = toeplitz_matrix(fact.phi, M).entries
    h = max(M // 2, 1)
    return float(np.max(np.abs(lhs[:h, :h] - rhs[:h, :h])))


def jacobi_minor_check(A: np.ndarray, U_indices: Sequence[int], V_indices: Sequence[int]) -> float:
    """Residual of ``det(A^{-1}[U,U]) = det(A[V,V]) / det(A)`` for complementary ``U``, ``V``."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    U, V = list(U_indices), list(V_indices)
    if sorted(U + V) != list(range(n)):
        raise ValueError("U_indices and V_indices must partition range(n)")
    dA = _linalg.det(A)
    if dA == 0 or _linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("A is not invertible")
    inv = _linalg.solve(A, np.eye(n))
    lhs = _linalg.det(inv[np.ix_(U, U)])
    rhs = _linalg.det(A[np.ix_(V, V)]) / dA
    return float(abs(lhs - rhs))


def oblique_jacobi_check(A: np.ndarray, R: np.ndarray, C: np.ndarray) -> float:
    """Residual of ``det(R A^{-1} C) = det(RC) det(I - Pi_V K |_V) / det(A)`` with ``K = I - A``.

    ``Pi_V = I - C (RC)^{-1} R`` projects onto ``V = ker R`` along ``ran C``;
    the restriction to ``V`` uses an orthonormal basis from QR.
    """
    A = np.asarray(A, dtype=complex)
    R = np.asarray(R, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = A.shape[0]
    gamma = R @ C
    if _linalg.cond(gamma) > 1e14:
        raise np.linalg.LinAlgError("Gamma = RC is not invertible")
    if _linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("A is not invertible")
    lhs = _linalg.det(R @ _linalg.solve(A, C))
    K = np.eye(n) - A
    pi_v = np.eye(n) - C @ _linalg.solve(gamma, R)
    basis = _linalg.null_space_qr(R)
    restricted = basis.conj().T @ (pi_v @ K) @ basis
    rhs = _linalg.det(gamma) * _linalg.det(np.eye(basis.shape[1]) - restricted) / _linalg.det(A)
    return float(abs(lhs - rhs))
