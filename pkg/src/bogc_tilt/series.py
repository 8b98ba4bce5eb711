"""Truncated Laurent series and Wiener-Hopf factorization of symbols.

A :class:`LaurentSeries` stores the coefficients of ``z**lo, ..., z**hi``.
Only two symbol families are supported: exponentials of symmetric Laurent
polynomials (:func:`make_exponential_symbol`) and finite products of rational
factors (:func:`make_rational_symbol`). Both carry their exact logarithm, so
the factorization never needs a numerical winding computation.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special

TOL_SERIES = 1e-10


class SeriesError(ValueError):
    """Raised when a series operation receives data outside its contract."""


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients ``coeffs[k]`` of ``z**(lo + k)``; zero outside the window."""

    lo: int
    coeffs: np.ndarray
    origin: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise SeriesError("LaurentSeries needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise SeriesError("LaurentSeries coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lo", int(self.lo))

    @classmethod
    def constant(cls, value: complex = 1.0) -> "LaurentSeries":
        return cls(0, [value])

    @classmethod
    def monomial(cls, k: int, value: complex = 1.0) -> "LaurentSeries":
        return cls(k, [value])

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    def coeff(self, k: int) -> complex:
        if self.lo <= k <= self.hi:
            return complex(self.coeffs[k - self.lo])
        return 0j

    def coeff_range(self, a: int, b: int) -> np.ndarray:
        """Coefficients of exponents ``a..b`` inclusive, zero-filled."""
        out = np.zeros(max(b - a + 1, 0), dtype=complex)
        s, e = max(a, self.lo), min(b, self.hi)
        if s <= e:
            out[s - a:e - a + 1] = self.coeffs[s - self.lo:e - self.lo + 1]
        return out

    def restrict(self, a: int, b: int) -> "LaurentSeries":
        return LaurentSeries(a, self.coeff_range(a, b))

    def reflect(self) -> "LaurentSeries":
        """The series of ``f(1/z)``."""
        return LaurentSeries(-self.hi, self.coeffs[::-1])

    def support(self, tol: float = 0.0) -> tuple[int, int] | None:
        """Smallest and largest exponent with ``|coeff| > tol``."""
        idx = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if idx.size == 0:
            return None
        return self.lo + int(idx[0]), self.lo + int(idx[-1])

    def scale(self, factor: complex) -> "LaurentSeries":
        return LaurentSeries(self.lo, self.coeffs * factor)

    def __neg__(self) -> "LaurentSeries":
        return self.scale(-1.0)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        a, b = min(self.lo, other.lo), max(self.hi, other.hi)
        return LaurentSeries(a, self.coeff_range(a, b) + other.coeff_range(a, b))

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        return series_multiply(self, other, (self.lo + other.lo, self.hi + other.hi))

    def __call__(self, z: complex) -> complex:
        return series_eval(self, z)


def series_multiply(f: LaurentSeries, g: LaurentSeries, window: tuple[int, int]) -> LaurentSeries:
    """Exact finite convolution of ``f`` and ``g``, clipped to ``window``."""
    a, b = int(window[0]), int(window[1])
    if b < a:
        raise SeriesError(f"empty window {window}")
    full = np.convolve(f.coeffs, g.coeffs)
    return LaurentSeries(f.lo + g.lo, full).restrict(a, b)


def series_exp(f: LaurentSeries, order: int) -> LaurentSeries:
    """``exp(f)`` for ``f`` supported on strictly positive (or strictly negative) exponents.

    Uses ``n g_n = sum_{k=1}^n k f_k g_{n-k}``. The result covers exponents
    ``0..order`` (or ``-order..0`` for negative support).
    """
    if order < 0:
        raise SeriesError("order must be nonnegative")
    sup = f.support()
    if sup is None:
        return LaurentSeries.constant(1.0)
    lo, hi = sup
    if lo <= 0 <= hi:
        raise SeriesError("series_exp needs a one-sided argument without constant term")
    negative = hi < 0
    if negative:
        f = f.reflect()
    fk = f.coeff_range(0, order)
    kf = fk * np.arange(order + 1)
    g = np.zeros(order + 1, dtype=complex)
    g[0] = 1.0
    last = f.hi
    for n in range(1, order + 1):
        m = min(n, last)
        g[n] = np.dot(kf[1:m + 1], g[n - 1:n - m - 1 if n - m - 1 >= 0 else None:-1]) / n
    out = LaurentSeries(0, g)
    return out.reflect() if negative else out


def series_eval(f: LaurentSeries, z: complex) -> complex:
    """Horner evaluation of the truncated series at ``z``."""
    z = complex(z)
    if z == 0:
        if f.lo < 0 and np.any(f.coeffs[:min(-f.lo, f.coeffs.size)] != 0):
            raise SeriesError("cannot evaluate negative powers at z=0")
        return f.coeff(0)
    pos = f.coeff_range(0, max(f.hi, 0))
    acc = 0j
    for c in pos[::-1]:
        acc = acc * z + c
    if f.lo < 0:
        neg = f.coeff_range(f.lo, -1)  # exponents lo..-1
        w = 1.0 / z
        tail = 0j
        for c in neg:  # highest power of w first
            tail = tail * w + c
        acc += tail * w
    return acc


def _check_points(points: Sequence[complex]) -> tuple[complex, ...]:
    pts = tuple(complex(p) for p in points)
    for p in pts:
        if not abs(p) < 1:
            raise SeriesError(f"rational factor point {p} must satisfy |p| < 1 "
                              "(factor must be analytic on the closed disk side)")
    if len(set(pts)) != len(pts):
        raise SeriesError("rational factor points must be pairwise distinct")
    return pts


def make_exponential_symbol(times: Sequence[float], half_width: int) -> LaurentSeries:
    """Coefficients of ``exp(sum_r t_r (z**r + z**-r))`` on ``[-half_width, half_width]``."""
    ts = tuple(float(t) for t in times)
    if not all(np.isfinite(ts)):
        raise SeriesError("times must be finite")
    if half_width < 2 * len(ts):
        raise SeriesError(f"half_width={half_width} < 2*len(times)={2 * len(ts)}")
    origin = ("exponential", ts)
    if not ts:
        return LaurentSeries(-half_width, _unit(half_width), origin=origin)
    inner = 2 * half_width + 8
    p = series_exp(LaurentSeries(1, ts), inner).coeff_range(0, inner)
    pos = np.array([np.dot(p[k:], p[:inner + 1 - k]) for k in range(half_width + 1)])
    coeffs = np.concatenate([pos[:0:-1], pos])
    return LaurentSeries(-half_width, coeffs, origin=origin)


def _unit(half_width: int) -> np.ndarray:
    c = np.zeros(2 * half_width + 1, dtype=complex)
    c[half_width] = 1.0
    return c


def _geometric_product(points: Iterable[complex], order: int) -> np.ndarray:
    g = np.zeros(order + 1, dtype=complex)
    g[0] = 1.0
    for y in points:
        geo = y ** np.arange(order + 1)
        g = np.convolve(g, geo)[:order + 1]
    return g


def make_rational_factor(points: Sequence[complex], side: str, half_width: int) -> LaurentSeries:
    """``prod (1 - x z)^{-1}`` (side ``"plus"``) or ``prod (1 - y/z)^{-1}`` (side ``"minus"``)."""
    if side not in ("plus", "minus"):
        raise SeriesError(f"side must be 'plus' or 'minus', got {side!r}")
    if half_width < 1:
        raise SeriesError("half_width must be at least 1")
    pts = _check_points(points)
    g = _geometric_product(pts, half_width)
    if side == "plus":
        return LaurentSeries(0, g, origin=("rational", pts, ()))
    return LaurentSeries(-half_width, g[::-1], origin=("rational", (), pts))


def make_rational_symbol(plus: Sequence[complex], minus: Sequence[complex],
                         half_width: int) -> LaurentSeries:
    """``prod_k (1 - x_k z)^{-1} prod_l (1 - y_l/z)^{-1}`` on ``[-half_width, half_width]``."""
    xs, ys = _check_points(plus), _check_points(minus)
    inner = 2 * half_width + 8
    fp = LaurentSeries(0, _geometric_product(xs, inner))
    fm = LaurentSeries(0, _geometric_product(ys, inner)).reflect()
    phi = series_multiply(fp, fm, (-half_width, half_width))
    return LaurentSeries(phi.lo, phi.coeffs, origin=("rational", xs, ys))


@dataclass(frozen=True, eq=False)
class SymbolFactorization:
    """Wiener-Hopf data ``phi = G * phi_minus * phi_plus`` and its derived series."""

    phi: LaurentSeries
    phi_plus: LaurentSeries
    phi_minus: LaurentSeries
    geometric_mean: complex
    b: LaurentSeries
    c_tilde: LaurentSeries
    log_szego_Z: complex
    truncation_order: int
    log_phi: LaurentSeries
    szego_tail_bound: float = 0.0

    @property
    def szego_Z(self) -> complex:
        return cmath.exp(self.log_szego_Z)

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.b.coeffs, self.c_tilde.coeffs) and self.b.lo == self.c_tilde.lo)

    def reconstruction_error(self) -> float:
        m = self.truncation_order
        recon = series_multiply(self.phi_minus, self.phi_plus, (-m, m)).scale(self.geometric_mean)
        return float(np.max(np.abs(recon.coeffs - self.phi.coeff_range(-m, m))))

    def unit_residual(self) -> float:
        """``|(b c)_0 - 1|`` with ``c`` recovered from ``c_tilde``."""
        c = self.c_tilde.reflect()
        return abs(series_multiply(self.b, c, (0, 0)).coeff(0) - 1.0)


def _log_coefficients(phi: LaurentSeries, half_width: int) -> tuple[LaurentSeries, float]:
    if phi.origin is None:
        raise SeriesError("series_log_split only accepts symbols built by "
                          "make_exponential_symbol or make_rational_symbol/factor")
    kind = phi.origin[0]
    m = half_width
    if kind == "exponential":
        ts = phi.origin[1]
        c = np.zeros(2 * m + 1, dtype=complex)
        for r, t in enumerate(ts, start=1):
            c[m + r] = t
            c[m - r] = t
        return LaurentSeries(-m, c), 0.0
    if kind == "rational":
        xs, ys = phi.origin[1], phi.origin[2]
        k = np.arange(1, m + 1)
        pos = sum((x ** k for x in xs), np.zeros(m, dtype=complex)) / k
        neg = sum((y ** k for y in ys), np.zeros(m, dtype=complex)) / k
        c = np.concatenate([neg[::-1], [0.0], pos])
        qx = max((abs(x) for x in xs), default=0.0)
        qy = max((abs(y) for y in ys), default=0.0)
        q = qx * qy
        tail = 0.0
        if q > 0:
            tail = len(xs) * len(ys) * q ** (m + 1) / ((m + 1) * (1 - q))
        return LaurentSeries(-m, c), tail
    raise SeriesError(f"unknown symbol origin {kind!r}")


def laurent_polynomial_exp(g: LaurentSeries, window: tuple[int, int]) -> LaurentSeries:
    """``exp(g)`` for a Laurent polynomial ``g`` without constant term.

    Each pair ``c z**r + d z**-r`` is exponentiated through the generating
    function of the modified Bessel functions, so the coefficients are formed
    without the cancellation a product of one-sided exponentials suffers when
    ``|c|`` and ``|d|`` are large.
    """
    a, b = window
    width = max(abs(a), abs(b))
    span = 2 * width
    if abs(g.coeff(0)) != 0:
        raise SeriesError("laurent_polynomial_exp needs a zero constant term")
    sup = g.support()
    out = LaurentSeries.constant(1.0)
    if sup is None:
        return out.restrict(a, b)
    deg = max(abs(sup[0]), abs(sup[1]))
    for r in range(1, deg + 1):
        c, d = g.coeff(r), g.coeff(-r)
        if c == 0 and d == 0:
            continue
        nmax = span // r + 1
        n = np.arange(nmax + 1)
        if d == 0:
            pos = np.exp(n * np.log(c + 0j) - special.gammaln(n + 1)) if c != 0 else None
            vals = np.concatenate([np.zeros(nmax), pos])
        elif c == 0:
            neg = np.exp(n * np.log(d + 0j) - special.gammaln(n + 1))
            vals = np.concatenate([neg[:0:-1], [1.0], np.zeros(nmax)])
        else:
            cd = c * d
            if cd.imag == 0 and cd.real < 0:
                sig = np.sqrt(-cd.real)
                base = special.jv(n, 2 * sig)
                up, down = c / sig, d / sig
            elif cd.imag == 0:
                sig = np.sqrt(cd.real)
                base = special.iv(n, 2 * sig)
                up, down = c / sig, d / sig
            else:
                s = cmath.sqrt(cd)
                base = special.iv(n, 2 * s)
                up, down = c / s, d / s
            pos = base * up ** n
            neg = base * down ** n
            vals = np.concatenate([neg[:0:-1], pos])
        vals = np.where(np.isfinite(vals), vals, 0.0)
        spread = np.zeros(2 * nmax * r + 1, dtype=complex)
        spread[::r] = vals
        factor = LaurentSeries(-nmax * r, spread).restrict(-span, span)
        out = series_multiply(out, factor, (-span, span))
    return out.restrict(a, b)


def series_log_split(phi: LaurentSeries, half_width: int) -> SymbolFactorization:
    """Canonical Wiener-Hopf factorization of a symbolically constructed symbol."""
    m = int(half_width)
    log_phi, tail = _log_coefficients(phi, m)
    geometric_mean = cmath.exp(log_phi.coeff(0))
    plus_log = LaurentSeries(1, log_phi.coeff_range(1, m))
    minus_log = LaurentSeries(-m, log_phi.coeff_range(-m, -1))
    phi_plus = series_exp(plus_log, m)
    phi_minus = series_exp(minus_log, m)
    diff = minus_log - plus_log  # log b
    if phi.origin[0] == "exponential":
        b = laurent_polynomial_exp(diff, (-m, m))
        c_tilde = laurent_polynomial_exp(-diff.reflect(), (-m, m))
    else:
        inv_plus = series_exp(-plus_log, m)
        b = series_multiply(phi_minus, inv_plus, (-m, m))
        c = series_multiply(series_exp(-minus_log, m), phi_plus, (-m, m))
        c_tilde = c.reflect()
    k = np.arange(1, m + 1)
    log_z = complex(np.sum(k * log_phi.coeff_range(1, m) * log_phi.coeff_range(-m, -1)[::-1]))
    return SymbolFactorization(
        phi=phi, phi_plus=phi_plus, phi_minus=phi_minus, geometric_mean=geometric_mean,
        b=b, c_tilde=c_tilde, log_szego_Z=log_z, truncation_order=m, log_phi=log_phi,
        szego_tail_bound=tail)


def symbol_from_dict(sym: dict, half_width: int) -> LaurentSeries:
    """Build a symbol from ``{"type": "exponential", "times": [...]}`` or
    ``{"type": "rational", "plus": [...], "minus": [...]}``."""
    kind = sym.get("type")
    if kind == "exponential":
        return make_exponential_symbol(sym.get("times", []), half_width)
    if kind == "rational":
        return make_rational_symbol(sym.get("plus", []), sym.get("minus", []), half_width)
    raise SeriesError(f"unknown symbol type {kind!r}")


def factorize(sym_or_phi, half_width: int) -> SymbolFactorization:
    phi = sym_or_phi if isinstance(sym_or_phi, LaurentSeries) else symbol_from_dict(sym_or_phi, half_width)
    return series_log_split(phi, half_width)
