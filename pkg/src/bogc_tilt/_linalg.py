"""Dense linear algebra helpers shared by the operator modules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg


@dataclass(frozen=True)
class LogDet:
    """Determinant stored as ``phase * exp(log_abs)``; ``phase`` is 0 for a singular matrix."""

    phase: complex
    log_abs: float

    @property
    def value(self) -> complex:
        if self.phase == 0:
            return 0j
        return self.phase * math.exp(self.log_abs)

    def __mul__(self, other: "LogDet") -> "LogDet":
        return LogDet(self.phase * other.phase, self.log_abs + other.log_abs)


def lu_logdet(a: np.ndarray) -> LogDet:
    """Determinant through LU with partial pivoting, accumulated in log form."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return LogDet(1.0 + 0j, 0.0)
    with warnings.catch_warnings():
        # An exactly singular matrix has determinant zero; that is a result, not an error.
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(a, check_finite=False)
    d = np.diag(lu)
    if np.any(d == 0):
        return LogDet(0j, -math.inf)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    mag = np.abs(d)
    phase = complex(np.prod(d / mag)) * (-1.0 if swaps % 2 else 1.0)
    phase /= abs(phase)
    return LogDet(phase, float(np.sum(np.log(mag))))


def det(a: np.ndarray) -> complex:
    return lu_logdet(a).value


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return linalg.solve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex), check_finite=False)


def cond(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 1.0
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0:
        return math.inf
    return float(s[0] / s[-1])


def null_space_qr(r: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``ker r`` for a full row rank ``k x n`` matrix, via QR of ``r^*``."""
    r = np.asarray(r, dtype=complex)
    k, n = r.shape
    q, _ = linalg.qr(r.conj().T, mode="full")
    return q[:, k:]


def numerical_rank(a: np.ndarray, threshold: float) -> tuple[int, np.ndarray]:
    """Number of singular values strictly above ``threshold``, and the singular values."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(s > threshold)), s


def rel_err(a: complex, b: complex) -> float:
    a, b = complex(a), complex(b)
    scale = max(abs(a), abs(b))
    if scale == 0:
        return 0.0
    return abs(a - b) / scale


def phase_of(z: complex) -> complex:
    return 1.0 + 0j if z == 0 else z / abs(z)

