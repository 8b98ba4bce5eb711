"""Airy function, Airy and one-spike kernels, Nystrom determinants on half-lines,
and the finite-L spiked Toeplitz kernels that converge to them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _linalg
from .operators import bogc_kernel
from .series import (LaurentSeries, SymbolFactorization, make_exponential_symbol, series_eval,
                     series_log_split)
from .tilt import TiltFamily, build_chart, fixed_tail_kernel

AI0 = 0.355028053887817239260063186004
AIP0 = -0.258819403792806798405183560189
AIRY_RANGE = 30.0

_MACLAURIN_LO, _MACLAURIN_HI = -4.5, 5.5
_OSC_START = -7.5
_BRIDGE_STEP = 0.75


def _taylor(x0: float, a0: np.ndarray | float, a1: np.ndarray | float, dx: np.ndarray,
            tol: float = 1e-18) -> tuple[np.ndarray, np.ndarray]:
    """Sum the Taylor series of ``y'' = x y`` about ``x0`` with ``y(x0)=a0``, ``y'(x0)=a1``.

    Coefficients follow ``(n+2)(n+1) c_{n+2} = x0 c_n + c_{n-1}``.
    """
    dx = np.asarray(dx, dtype=float)
    cm1 = np.zeros_like(dx)
    cn = np.zeros_like(dx) + a0
    cn1 = np.zeros_like(dx) + a1
    val = cn + cn1 * dx
    der = cn1.copy()
    pw = dx.copy()  # dx**(n+1)
    quiet = 0
    for n in range(600):
        cn2 = (x0 * cn + cm1) / ((n + 2) * (n + 1))
        term_v = cn2 * pw * dx
        term_d = (n + 2) * cn2 * pw
        val = val + term_v
        der = der + term_d
        small = np.all(np.abs(term_v) <= tol * (1 + np.abs(val))) and \
            np.all(np.abs(term_d) <= tol * (1 + np.abs(der)))
        # Some coefficients vanish identically, so wait for three quiet terms in a row.
        quiet = quiet + 1 if small else 0
        if quiet >= 3:
            break
        cm1, cn, cn1 = cn, cn1, cn2
        pw = pw * dx
    return val, der


def _asymptotic_coeffs(kmax: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.ones(kmax + 1)
    for k in range(1, kmax + 1):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    v = np.array([1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, kmax + 1)])
    return u, v


_U, _V = _asymptotic_coeffs(60)


def _truncated_sum(coeffs: np.ndarray, inv: np.ndarray, signs: bool) -> np.ndarray:
    """Sum ``sum_k (+-1)^k coeffs[k] inv**k`` up to the smallest term."""
    total = np.zeros_like(inv)
    done = np.zeros(inv.shape, dtype=bool)
    prev = np.full(inv.shape, np.inf)
    pw = np.ones_like(inv)
    for k in range(coeffs.size):
        term = coeffs[k] * pw * ((-1) ** k if signs else 1)
        grow = np.abs(term) > prev
        done |= grow
        total = np.where(done, total, total + term)
        prev = np.where(done, prev, np.abs(term))
        pw = pw * inv
        if np.all(done):
            break
    return total


def _ai_decaying(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = 2.0 / 3.0 * x ** 1.5
    inv = 1.0 / zeta
    pre = np.exp(-zeta) / (2 * math.sqrt(math.pi))
    su = _truncated_sum(_U, inv, True)
    sv = _truncated_sum(_V, inv, True)
    return pre * x ** -0.25 * su, -pre * x ** 0.25 * sv


def _ai_oscillatory(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = -x
    zeta = 2.0 / 3.0 * z ** 1.5
    inv2 = zeta ** -2.0
    even_u = _truncated_sum(_U[0::2], inv2, True)
    odd_u = _truncated_sum(_U[1::2], inv2, True) / zeta
    even_v = _truncated_sum(_V[0::2], inv2, True)
    odd_v = _truncated_sum(_V[1::2], inv2, True) / zeta
    ph = zeta - math.pi / 4
    c, s = np.cos(ph), np.sin(ph)
    pre = 1.0 / math.sqrt(math.pi)
    ai = pre * z ** -0.25 * (c * even_u + s * odd_u)
    aip = pre * z ** 0.25 * (s * even_v - c * odd_v)
    return ai, aip


_BRIDGE: list[tuple[float, float, float]] = []


def _bridge_anchors() -> list[tuple[float, float, float]]:
    if not _BRIDGE:
        x0 = _MACLAURIN_LO
        a, ap = _taylor(0.0, AI0, AIP0, np.array([x0]))
        a, ap = float(a[0]), float(ap[0])
        while x0 > _OSC_START:
            _BRIDGE.append((x0, a, ap))
            step = max(-_BRIDGE_STEP, _OSC_START - x0)
            na, nap = _taylor(x0, a, ap, np.array([step]))
            x0, a, ap = x0 + step, float(na[0]), float(nap[0])
    return _BRIDGE


def airy_ai(x) -> tuple[np.ndarray | float, np.ndarray | float]:
    """``(Ai(x), Ai'(x))`` for ``|x| <= 30``.

    Maclaurin series on ``[-4.5, 5.5]``, Taylor continuation of the Airy
    equation down to ``-7.5``, and the asymptotic expansions (decaying for
    ``x > 5.5``, oscillatory for ``x < -7.5``) summed to their smallest term.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr)
    if np.any(~np.isfinite(xs)) or np.any(np.abs(xs) > AIRY_RANGE):
        raise ValueError(f"airy_ai supports |x| <= {AIRY_RANGE}")
    ai = np.empty_like(xs)
    aip = np.empty_like(xs)
    mid = (xs >= _MACLAURIN_LO) & (xs <= _MACLAURIN_HI)
    if mid.any():
        ai[mid], aip[mid] = _taylor(0.0, AI0, AIP0, xs[mid])
    right = xs > _MACLAURIN_HI
    if right.any():
        ai[right], aip[right] = _ai_decaying(xs[right])
    left = xs < _OSC_START
    if left.any():
        ai[left], aip[left] = _ai_oscillatory(xs[left])
    bridge = (xs >= _OSC_START) & (xs < _MACLAURIN_LO)
    if bridge.any():
        for x0, a, ap in _bridge_anchors():
            sel = bridge & (xs <= x0) & (xs > x0 - _BRIDGE_STEP - 1e-12)
            if sel.any():
                ai[sel], aip[sel] = _taylor(x0, a, ap, xs[sel] - x0)
                bridge &= ~sel
    if scalar:
        return float(ai[0]), float(aip[0])
    return ai.reshape(arr.shape), aip.reshape(arr.shape)


def airy_kernel(x, y) -> np.ndarray | float:
    """``K_Ai(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)``.

    When ``|x - y| < 1e-6`` the diagonal value ``Ai'(m)^2 - m Ai(m)^2`` at the
    midpoint ``m`` is used; the kernel is symmetric so this is second order.
    """
    X, Y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ax, apx = airy_ai(X)
    ay, apy = airy_ai(Y)
    diff = X - Y
    close = np.abs(diff) < 1e-6
    safe = np.where(close, 1.0, diff)
    off = (ax * apy - apx * ay) / safe
    mid = 0.5 * (X + Y)
    am, apm = airy_ai(mid)
    diag = apm ** 2 - mid * am ** 2
    out = np.where(close, diag, off)
    return float(out) if np.ndim(out) == 0 else out


_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _phi_edges(upper: float, w: float) -> np.ndarray:
    """Unit panels on ``[0, upper]``, refined geometrically on ``[0, 1]`` at the scale ``1/w``."""
    edges = [float(k) for k in range(int(math.ceil(upper)) + 1)]
    edges[-1] = upper
    fine = 1.0 / w
    while fine < 1.0:
        edges.append(fine)
        fine *= 2.0
    return np.unique(np.clip(edges, 0.0, upper))


def phi_w(x, w: float) -> np.ndarray | float:
    """``Phi_w(x) = int_0^inf exp(-w t) Ai(x + t) dt``.

    Composite 32-point Gauss-Legendre on ``[0, T]`` with ``T = max(0, -x) + 16``.
    Panels have unit width, plus geometrically graded ones near ``t = 0`` when
    ``w > 1``; beyond ``x + t = 30`` the integrand is below double precision and
    is dropped.
    """
    if not w > 0:
        raise ValueError("w must be positive")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    upper = float(np.max(np.maximum(0.0, -arr) + 16.0))
    edges = _phi_edges(upper, w)
    h = np.diff(edges)
    t = (edges[:-1, None] + 0.5 * (_PANEL_NODES[None, :] + 1.0) * h[:, None]).ravel()
    wt = (0.5 * _PANEL_WEIGHTS[None, :] * h[:, None]).ravel()
    arg = arr[:, None] + t[None, :]
    inside = arg <= AIRY_RANGE
    ai = np.where(inside, airy_ai(np.minimum(arg, AIRY_RANGE))[0], 0.0)
    limit = (np.maximum(0.0, -arr) + 16.0)[:, None]
    vals = np.where(t[None, :] <= limit, np.exp(-w * t)[None, :] * ai, 0.0)
    out = vals @ wt
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    order: int


def half_line_grid(s: float, order: int, mapping: str = "log") -> QuadratureGrid:
    """Gauss-Legendre nodes on ``(s, inf)`` through ``t = s - 2 log(1-u)`` (``"log"``)
    or ``t = s + u/(1-u)`` (``"rational"``)."""
    u, wu = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    if mapping == "log":
        t = s - 2.0 * np.log1p(-u)
        jac = 2.0 / (1.0 - u)
    elif mapping == "rational":
        t = s + u / (1.0 - u)
        jac = 1.0 / (1.0 - u) ** 2
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    return QuadratureGrid(nodes=t, weights=wu * jac, order=order)


def nystrom_fredholm(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], s: float,
                     order: int, mapping: str = "log") -> float:
    """``det(I - K)`` on ``L^2(s, inf)`` from the Nystrom matrix ``I - W^{1/2} K W^{1/2}``."""
    g = half_line_grid(s, order, mapping)
    keep = g.nodes <= AIRY_RANGE
    x, wts = g.nodes[keep], g.weights[keep]
    if x.size == 0:
        return 1.0
    sw = np.sqrt(wts)
    K = np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    A = np.eye(x.size) - sw[:, None] * K * sw[None, :]
    return float(_linalg.det(A).real)


def boundary_kernel(w: float, s: float) -> Callable:
    """``K_Ai(x, y) - exp(-w(x-s)) K_Ai(s, y)``."""
    def k(x, y):
        return airy_kernel(x, y) - np.exp(-w * (x - s)) * airy_kernel(s, y)
    return k


def bbp_kernel(w: float) -> Callable:
    """``K_Ai(x, y) - Phi_w(x) Ai(y)``."""
    def k(x, y):
        xs = np.asarray(x)[:, 0] if np.ndim(x) == 2 else np.asarray(x)
        ph = phi_w(xs, w)
        ph = ph[:, None] if np.ndim(x) == 2 else ph
        return airy_kernel(x, y) - ph * airy_ai(y)[0]
    return k


def bbp_pushthrough_check(w: float, s: float, order: int = 60) -> tuple[float, float]:
    """Nystrom determinants of the boundary kernel and of the one-spike kernel on ``(s, inf)``."""
    return (nystrom_fredholm(boundary_kernel(w, s), s, order),
            nystrom_fredholm(bbp_kernel(w), s, order))


@dataclass(frozen=True)
class SpikedSymbolParams:
    a: float
    b: float
    L: float
    w: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and 0 < self.b < self.a / 8):
            raise ValueError(f"need a > 0 and 0 < b < a/8, got a={self.a}, b={self.b}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not self.w > 0:
            raise ValueError("w must be positive")

    @property
    def chi(self) -> float:
        return 2 * self.a - 4 * self.b

    @property
    def c(self) -> float:
        return (self.a - 8 * self.b) ** (1.0 / 3.0)

    @property
    def scale(self) -> float:
        """``c L^{1/3}``."""
        return self.c * self.L ** (1.0 / 3.0)

    @property
    def N(self) -> int:
        return int(math.floor(self.chi * self.L + self.scale * self.s))

    @property
    def alpha(self) -> float:
        return -math.exp(-self.w / self.scale)

    @property
    def times(self) -> tuple[float, float]:
        return (self.L * self.a, self.L * self.b)

    @property
    def tilt_degree(self) -> int:
        return 64 * math.ceil(self.L ** (1.0 / 3.0))

    def lattice_x(self, n) -> np.ndarray:
        return (np.asarray(n, dtype=float) - self.chi * self.L) / self.scale


def spiked_factorization(params: SpikedSymbolParams, M: int) -> SymbolFactorization:
    hw = 2 * M + 16
    return series_log_split(make_exponential_symbol(params.times, hw), hw)


def spiked_tilts(params: SpikedSymbolParams, N: int) -> tuple[TiltFamily, float]:
    """``xi_N = (1 - alpha z)^{-1}`` truncated, all other tilts 1; also the truncation bound ``|alpha|^deg``."""
    deg = params.tilt_degree
    alpha = params.alpha
    one = LaurentSeries.constant(1.0)
    last = LaurentSeries(0, alpha ** np.arange(deg + 1))
    return TiltFamily((one,) * (N - 1) + (last,), (one,) * N), abs(alpha) ** (deg + 1)


@dataclass(frozen=True, eq=False)
class SpikedKernelCheck:
    lhs: np.ndarray
    rhs: np.ndarray
    max_abs_diff: float
    boundary_value: complex
    boundary_series: complex
    factor_error: float
    tilt_tail: float
    N: int
    M: int


def spiked_column_kernel_exact(params: SpikedSymbolParams, M: int | None = None) -> SpikedKernelCheck:
    """Fixed-tail kernel of the one-column spike against ``K(i,j) - alpha^{i-N+1} K(N-1, j)``."""
    N = params.N
    M = N + 64 if M is None else M
    if N < 1 or N > M - 8:
        raise ValueError(f"need 1 <= N <= M-8, got N={N}, M={M}")
    fact = spiked_factorization(params, M)
    tilts, tail = spiked_tilts(params, N)
    K = bogc_kernel(fact, M).entries
    chart = build_chart(fact, tilts, N, M)
    lhs = fixed_tail_kernel(fact, tilts, N, M, chart=chart, K=K).kernel.entries
    alpha = params.alpha
    powers = alpha ** np.arange(1, M - N + 1)
    rhs = K[N:, N:] - np.outer(powers, K[N - 1, N:])
    # Boundary entry of the last chart column against phi_-(1/alpha) = sum h_m alpha^m.
    boundary = complex(chart.C[N - 1, N - 1])
    series = complex(series_eval(fact.phi_minus.reflect(), alpha))
    # Rank-one factor Q_N C (P_N C)^{-1} = (sum_r alpha^{r+1} e_{N+r}) e_{N-1}^*.
    factor = chart.C[N:] @ _linalg.solve(chart.C[:N], np.eye(N))
    expected = np.zeros_like(factor)
    expected[:, N - 1] = powers
    return SpikedKernelCheck(lhs=lhs, rhs=rhs, max_abs_diff=float(np.max(np.abs(lhs - rhs))),
                             boundary_value=boundary, boundary_series=series,
                             factor_error=float(np.max(np.abs(factor - expected))),
                             tilt_tail=tail, N=N, M=M)


def spiked_tilted_chain(params: SpikedSymbolParams, M: int | None = None) -> tuple[complex, complex]:
    """Direct spiked minor against ``G^N Z det(Gamma) det(I - K_N)`` at finite ``L``."""
    from .tilt import tilted_fredholm_evaluate, tilted_minor_direct
    N = params.N
    # The direct minor needs the symbol on the full tilt degree, so M covers it.
    M = N + params.tilt_degree + 8 if M is None else M
    fact = spiked_factorization(params, M)
    tilts, _ = spiked_tilts(params, N)
    rhs = tilted_fredholm_evaluate(fact, tilts, N, M).value
    return complex(tilted_minor_direct(fact.phi, tilts, N)), complex(rhs)


DEFAULT_X_GRID = tuple(np.linspace(-3.0, 3.0, 13))


@dataclass(frozen=True)
class ScalingRow:
    L: float
    err_coeff: float
    err_kernel: float
    err_factor: float

    def to_json(self) -> dict:
        return {"L": self.L, "err_coeff": self.err_coeff, "err_kernel": self.err_kernel,
                "err_factor": self.err_factor}


def spiked_scaling_row(params: SpikedSymbolParams, x_grid: Sequence[float] = DEFAULT_X_GRID) -> ScalingRow:
    """Airy-scale errors of the coefficients of ``b_L``, of the kernel ``K_L`` and of the
    spike factor at one ``L``.

    Lattice points are ``n = round(chi L + c L^{1/3} x)`` and the comparison uses
    the realized ``x_n = (n - chi L) / (c L^{1/3})``.
    """
    scale = params.scale
    n = np.rint(params.chi * params.L + scale * np.asarray(x_grid)).astype(int)
    M = int(params.N + 64 * math.ceil(params.L ** (1.0 / 3.0)))
    M = max(M, int(n.max()) + 8)
    fact = spiked_factorization(params, M)
    xn = params.lattice_x(n)
    bn = np.array([fact.b.coeff(int(k)) for k in n]).real
    ai = airy_ai(xn)[0]
    err_coeff = float(np.max(np.abs((-1.0) ** n * scale * bn - ai)))
    K = bogc_kernel(fact, M).entries.real
    sub = K[np.ix_(n, n)]
    sign = (-1.0) ** (n[:, None] + n[None, :])
    err_kernel = float(np.max(np.abs(scale * sign * sub - airy_kernel(xn[:, None], xn[None, :]))))
    N = params.N
    r = n[n >= N] - N
    xs = params.lattice_x(N + r)
    factor = (-1.0) ** (r + 1) * params.alpha ** (r + 1)
    err_factor = float(np.max(np.abs(factor - np.exp(-params.w * (xs - params.s))))) if r.size else 0.0
    return ScalingRow(L=float(params.L), err_coeff=err_coeff, err_kernel=err_kernel,
                      err_factor=err_factor)


def spiked_scaling_check(a: float = 0.25, b: float = 0.02, L_list: Sequence[float] = (50, 100, 200),
                         w: float = 1.0, s: float = 0.0,
                         x_grid: Sequence[float] = DEFAULT_X_GRID) -> list[ScalingRow]:
    return [spiked_scaling_row(SpikedSymbolParams(a, b, L, w, s), x_grid) for L in L_list]


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(values[i + 1] < values[i] for i in range(len(values) - 1))


def airy_determinant(s: float, order: int = 60, mapping: str = "log") -> float:
    """``det(I - K_Ai)`` on ``(s, inf)``."""
    return nystrom_fredholm(airy_kernel, s, order, mapping)


__all__ = [name for name in dir() if not name.startswith("_")]
