"""Partitions, bialternants, Schur and Grothendieck polynomials, and the
Cauchy-Binet expansion of tilted minors over partitions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from . import _linalg
from .series import (LaurentSeries, SymbolFactorization, make_rational_factor,
                     make_rational_symbol, series_eval, series_multiply)
from .tilt import TiltFamily, tilted_minor_direct

MIN_GAP = 1e-6


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]
    max_length: int | None = None

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if any(x < 0 for x in p) or any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ValueError(f"parts must be weakly decreasing and nonnegative: {p}")
        p = tuple(x for x in p if x > 0)
        if self.max_length is not None and len(p) > self.max_length:
            raise ValueError(f"partition {p} has more than {self.max_length} parts")
        object.__setattr__(self, "parts", p)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def padded(self, n: int) -> tuple[int, ...]:
        if len(self.parts) > n:
            raise ValueError(f"partition {self.parts} has more than {n} parts")
        return self.parts + (0,) * (n - len(self.parts))

    def contains(self, other: "Partition") -> bool:
        n = max(len(self), len(other))
        return all(a >= b for a, b in zip(self.padded(n), other.padded(n)))


def _partitions_of(w: int, max_length: int, max_part: int) -> Iterator[tuple[int, ...]]:
    # Descending lexicographic order.
    if w == 0:
        yield ()
        return
    if max_length == 0:
        return
    for first in range(min(w, max_part), 0, -1):
        if first * max_length < w:
            break
        for rest in _partitions_of(w - first, max_length - 1, first):
            yield (first,) + rest


def partitions_of_weight(w: int, max_length: int) -> list[Partition]:
    return [Partition(p, max_length) for p in _partitions_of(w, max_length, w)]


def enumerate_partitions(max_weight: int, max_length: int) -> Iterator[Partition]:
    """All partitions with ``|mu| <= max_weight`` and at most ``max_length`` parts,
    by weight and then in descending lexicographic order."""
    if max_weight < 0:
        return
    for w in range(max_weight + 1):
        yield from partitions_of_weight(w, max_length)


def _check_alphabet(Y: Sequence[complex]) -> np.ndarray:
    y = np.asarray(Y, dtype=complex)
    for a, b in combinations(range(y.size), 2):
        if abs(y[a] - y[b]) <= MIN_GAP:
            raise ValueError(f"points y[{a}]={y[a]} and y[{b}]={y[b]} are closer than {MIN_GAP}")
    return y


def vandermonde(Y: Sequence[complex]) -> complex:
    """``prod_{i<j} (y_i - y_j)``."""
    y = np.asarray(Y, dtype=complex)
    out = 1.0 + 0j
    for i, j in combinations(range(y.size), 2):
        out *= y[i] - y[j]
    return out


def bialternant(xi: Sequence[LaurentSeries], Y: Sequence[complex]) -> complex:
    """``det[y_i^{N-j} xi_{N-j+1}(y_i)] / prod_{i<j}(y_i - y_j)``."""
    y = _check_alphabet(Y)
    N = y.size
    if len(xi) != N:
        raise ValueError(f"need {N} tilts for {N} points, got {len(xi)}")
    if N == 0:
        return 1.0 + 0j
    A = np.empty((N, N), dtype=complex)
    for c in range(N):
        k = N - 1 - c
        A[:, c] = [yi ** k * series_eval(xi[k], yi) for yi in y]
    return _linalg.det(A) / vandermonde(y)


def schur_tilts(lam: Partition | Sequence[int], N: int) -> list[LaurentSeries]:
    """``xi_j = z^{lam_{N+1-j}}``, so that the bialternant is ``s_lam``."""
    parts = _as_partition(lam).padded(N)
    return [LaurentSeries.monomial(parts[N - 1 - j]) for j in range(N)]


def _binomial_power(beta: complex, n: int) -> LaurentSeries:
    return LaurentSeries(0, [math.comb(n, k) * beta ** k for k in range(n + 1)])


def grothendieck_tilts(lam: Partition | Sequence[int], beta: complex, N: int,
                       variant: str = "G") -> list[LaurentSeries]:
    parts = _as_partition(lam).padded(N)
    hat = [parts[N - 1 - j] for j in range(N)]
    if variant == "G":
        return [_binomial_power(beta, N - 1 - j) * LaurentSeries.monomial(hat[j]) for j in range(N)]
    if variant == "G_tilde":
        return [_binomial_power(beta, hat[j]) for j in range(N)]
    raise ValueError(f"variant must be 'G' or 'G_tilde', got {variant!r}")


def grothendieck_eval(lam: Partition | Sequence[int], beta: complex, Y: Sequence[complex],
                      variant: str = "G") -> complex:
    N = len(Y)
    return bialternant(grothendieck_tilts(lam, beta, N, variant), Y)


def schur_eval(lam: Partition | Sequence[int], Y: Sequence[complex]) -> complex:
    return bialternant(schur_tilts(lam, len(Y)), Y)


def _as_partition(lam) -> Partition:
    return lam if isinstance(lam, Partition) else Partition(tuple(lam))


def bialternant_factorization_check(xi: Sequence[LaurentSeries], Y: Sequence[complex],
                                    phi_plus: LaurentSeries, N: int,
                                    half_width: int = 64) -> tuple[complex, complex]:
    """Column-tilted minor of ``phi_+ * prod (1 - y/z)^{-1}`` against ``S_xi(Y) prod phi_+(y)``."""
    y = _check_alphabet(Y)
    if y.size != N or len(xi) != N:
        raise ValueError("need N points and N tilts")
    minus = make_rational_factor(list(y), "minus", half_width)
    phi = series_multiply(phi_plus, minus, (-half_width, half_width))
    one = LaurentSeries.constant(1.0)
    tilts = TiltFamily(tuple(xi), (one,) * N)
    lhs = tilted_minor_direct(phi, tilts, N)
    rhs = bialternant(xi, y) * np.prod([series_eval(phi_plus, yi) for yi in y])
    return complex(lhs), complex(rhs)


def jacobi_trudi(mu: Partition | Sequence[int], seqs: Sequence[np.ndarray]) -> complex:
    """``det[c^{(i)}_{mu_j - j + i}]`` with ``c_r = 0`` for ``r < 0`` or past the stored window."""
    N = len(seqs)
    m = _as_partition(mu).padded(N)
    A = np.zeros((N, N), dtype=complex)
    for i in range(N):
        s = seqs[i]
        for j in range(N):
            r = m[j] - j + i
            if 0 <= r < len(s):
                A[i, j] = s[r]
    return _linalg.det(A)


def _jt_batch(parts: np.ndarray, seqs: np.ndarray) -> np.ndarray:
    """Vectorized Jacobi-Trudi determinants for a stack of padded partitions."""
    P, N = parts.shape
    L = seqs.shape[1]
    r = parts[:, None, :] - np.arange(N)[None, None, :] + np.arange(N)[None, :, None]
    ok = (r >= 0) & (r < L)
    rows = np.broadcast_to(np.arange(N)[None, :, None], r.shape)
    A = np.where(ok, seqs[rows, np.clip(r, 0, L - 1)], 0)
    return np.linalg.det(A)


def cauchy_binet_sequences(fact: SymbolFactorization, tilts: TiltFamily, N: int,
                           length: int) -> tuple[np.ndarray, np.ndarray]:
    """Reversed coefficient families of ``xi_j phi_+`` (powers of ``z``) and
    ``theta_i phi_-`` (powers of ``1/z``), each of the given length."""
    a = np.zeros((N, length), dtype=complex)
    b = np.zeros((N, length), dtype=complex)
    for j in range(N):
        a[j] = series_multiply(tilts.xi[j], fact.phi_plus, (0, length - 1)).coeff_range(0, length - 1)
        tb = series_multiply(tilts.theta[j], fact.phi_minus, (-(length - 1), 0))
        b[j] = tb.coeff_range(-(length - 1), 0)[::-1]
    return a[::-1].copy(), b[::-1].copy()


def _factor_eval(fact: SymbolFactorization, side: str, z: np.ndarray) -> np.ndarray:
    """Closed-form ``phi_+`` or ``phi_-`` at the points ``z``."""
    kind = fact.phi.origin[0]
    if kind == "exponential":
        ts = fact.phi.origin[1]
        w = z if side == "plus" else 1.0 / z
        return np.exp(sum(t * w ** r for r, t in enumerate(ts, start=1)))
    pts = fact.phi.origin[1] if side == "plus" else fact.phi.origin[2]
    w = z if side == "plus" else 1.0 / z
    out = np.ones_like(z, dtype=complex)
    for p in pts:
        out = out / (1 - p * w)
    return out


def _analytic_radius(fact: SymbolFactorization, side: str) -> float:
    if fact.phi.origin[0] == "exponential":
        return math.inf
    pts = fact.phi.origin[1] if side == "plus" else fact.phi.origin[2]
    q = max((abs(p) for p in pts), default=0.0)
    return math.inf if q == 0 else 1.0 / q


def _cauchy_constant(fact: SymbolFactorization, series: Sequence[LaurentSeries], side: str,
                     rho: float, samples: int = 256) -> float:
    ang = np.exp(2j * np.pi * np.arange(samples) / samples)
    z = rho * ang if side == "plus" else ang / rho
    base = np.abs(_factor_eval(fact, side, z))
    best = 0.0
    for f in series:
        vals = np.abs(np.array([series_eval(f, zz) for zz in z]))
        best = max(best, float(np.max(vals * base)))
    # Sampling the circle can miss the maximum slightly; pad it.
    return 1.05 * best


def partition_count_bound(w: int, N: int) -> int:
    return math.comb(w + N - 1, N - 1)


@dataclass(frozen=True)
class TailModel:
    """Terms of weight ``w`` bounded by ``exp(log_prefactor) * C(w+N-1, N-1) * ratio**w``."""

    log_prefactor: float
    ratio: float
    N: int

    def tail(self, cutoff: int) -> float:
        """Bound on the sum of all terms of weight ``> cutoff``."""
        if self.ratio >= 1:
            return math.inf
        log_ratio = math.log(self.ratio)
        total, w = 0.0, cutoff + 1
        while True:
            log_term = self.log_prefactor + math.log(partition_count_bound(w, self.N)) + w * log_ratio
            if log_term > 700:
                return math.inf
            term = math.exp(log_term)
            total += term
            if term < 1e-18 * max(total, 1e-300) or w > cutoff + 100000:
                break
            w += 1
        return total


def _radius_grid(R: float) -> list[float]:
    return list(np.geomspace(1.05, min(R, 64.0) * 0.98, 24))


def _tail_model(fact: SymbolFactorization, tilts: TiltFamily, N: int,
                rho: float | None, cutoff: int) -> TailModel:
    ra, rb = _analytic_radius(fact, "plus"), _analytic_radius(fact, "minus")
    grid_a = [rho] if rho is not None else _radius_grid(ra)
    grid_b = [rho] if rho is not None else _radius_grid(rb)
    ca = [_cauchy_constant(fact, tilts.xi, "plus", p) for p in grid_a]
    cb = [_cauchy_constant(fact, tilts.theta, "minus", p) for p in grid_b]
    log_g = N * math.log(abs(fact.geometric_mean))
    best = None
    for pa, xa in zip(grid_a, ca):
        for pb, xb in zip(grid_b, cb):
            log_pre = log_g + 2 * math.lgamma(N + 1) + N * (math.log(xa) + math.log(xb))
            model = TailModel(log_pre, 1.0 / (pa * pb), N)
            t = model.tail(cutoff)
            if best is None or t < best[0]:
                best = (t, model)
    return best[1]


@dataclass(frozen=True)
class CauchyBinetResult:
    partial_sum: complex
    tail_estimate: float
    cutoff: int
    terms: int


def cauchy_binet_sum(fact: SymbolFactorization, tilts: TiltFamily, N: int,
                     weight_cutoff: int = 24, rho: float | None = None, tol: float | None = None,
                     hard_cap: int = 60) -> CauchyBinetResult:
    """``G^N sum_{|mu| <= cutoff, l(mu) <= N} JT_mu(a) JT_mu(b)``.

    With ``tol`` given, the cutoff grows until the tail estimate drops below
    it or ``hard_cap`` is reached. The tail estimate comes from Cauchy bounds
    on circles of radius ``rho`` (for ``xi phi_+``) and ``1/rho`` (for
    ``theta phi_-``); when ``rho`` is omitted the radii minimizing the bound are
    chosen from a grid.
    """
    model = _tail_model(fact, tilts, N, rho, weight_cutoff)
    cutoff = weight_cutoff
    if tol is not None:
        while cutoff < hard_cap and model.tail(cutoff) >= tol:
            cutoff += 1
    length = cutoff + N + 1
    a, b = cauchy_binet_sequences(fact, tilts, N, length)
    g = fact.geometric_mean ** N
    total = 0j
    terms = 0
    for w in range(cutoff + 1):
        parts = np.array([p.padded(N) for p in partitions_of_weight(w, N)], dtype=int)
        if parts.size == 0:
            continue
        stratum = np.sum(_jt_batch(parts, a) * _jt_batch(parts, b))
        total += stratum
        terms += parts.shape[0]
    return CauchyBinetResult(partial_sum=complex(g * total), tail_estimate=model.tail(cutoff),
                             cutoff=cutoff, terms=terms)


def complete_homogeneous(alphabet: Sequence[complex], length: int) -> np.ndarray:
    """``h_0, ..., h_{length-1}`` of a finite alphabet."""
    return make_rational_factor(list(alphabet), "plus", max(length - 1, 1)).coeff_range(0, length - 1)


def skew_schur(eta: Partition | Sequence[int], lam: Partition | Sequence[int],
               alphabet: Sequence[complex]) -> complex:
    """``s_{eta/lam}`` from ``det[h_{eta_i - lam_j - i + j}]``."""
    eta, lam = _as_partition(eta), _as_partition(lam)
    n = max(len(eta), len(lam))
    if n == 0:
        return 1.0 + 0j
    e, l = eta.padded(n), lam.padded(n)
    h = complete_homogeneous(alphabet, max(eta.weight, 0) + n + 1)
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            r = e[i] - l[j] - i + j
            if 0 <= r < h.size:
                A[i, j] = h[r]
    return _linalg.det(A)


@dataclass(frozen=True)
class SkewExpansionResult:
    partial_sum: complex
    direct: complex
    min_summand: float
    terms: int


def skew_schur_expansion_check(plus: Sequence[complex], minus: Sequence[complex],
                               lam: Partition | Sequence[int], nu: Partition | Sequence[int],
                               N: int, cutoff: int = 30, half_width: int = 128) -> SkewExpansionResult:
    """Monomial-tilted minor of ``prod(1-xz)^{-1} prod(1-y/z)^{-1}`` against
    ``sum_eta s_{eta/lam}(x) s_{eta/nu}(y)`` over ``|eta| <= cutoff``."""
    lam, nu = _as_partition(lam), _as_partition(nu)
    lp, np_ = lam.padded(N), nu.padded(N)
    xi = tuple(LaurentSeries.monomial(lp[N - 1 - j]) for j in range(N))
    theta = tuple(LaurentSeries.monomial(-np_[N - 1 - i]) for i in range(N))
    phi = make_rational_symbol(plus, minus, half_width)
    direct = tilted_minor_direct(phi, TiltFamily(xi, theta), N)
    total, terms, lowest = 0j, 0, math.inf
    for eta in enumerate_partitions(cutoff, N):
        if not (eta.contains(lam) and eta.contains(nu)):
            continue
        term = skew_schur(eta, lam, plus) * skew_schur(eta, nu, minus)
        total += term
        terms += 1
        lowest = min(lowest, term.real)
    return SkewExpansionResult(partial_sum=complex(total), direct=complex(direct),
                               min_summand=float(lowest), terms=terms)


def gessel_product(plus: Sequence[complex], minus: Sequence[complex]) -> complex:
    """``prod_{k,l} (1 - x_k y_l)^{-1}``."""
    out = 1.0 + 0j
    for x in plus:
        for y in minus:
            out /= 1 - x * y
    return out


def _skew_cells(eta: tuple[int, ...], lam: tuple[int, ...]) -> list[tuple[int, int]]:
    n = len(eta)
    lp = lam + (0,) * (n - len(lam))
    return [(i, j) for i in range(n) for j in range(lp[i], eta[i])]


def schur_tableaux(eta: Partition | Sequence[int], alphabet: Sequence[complex],
                   lam: Partition | Sequence[int] = ()) -> complex:
    """``s_{eta/lam}`` by brute-force enumeration of semistandard tableaux."""
    eta, lam = _as_partition(eta), _as_partition(lam)
    if not eta.contains(lam):
        return 0j
    x = [complex(v) for v in alphabet]
    n = len(x)
    cells = _skew_cells(eta.parts, lam.parts)
    filled: dict[tuple[int, int], int] = {}
    total = 0j

    def rec(k: int, prod: complex):
        nonlocal total
        if k == len(cells):
            total += prod
            return
        i, j = cells[k]
        lo = 0
        if (i, j - 1) in filled:
            lo = max(lo, filled[(i, j - 1)])
        if (i - 1, j) in filled:
            lo = max(lo, filled[(i - 1, j)] + 1)
        for v in range(lo, n):
            filled[(i, j)] = v
            rec(k + 1, prod * x[v])
        filled.pop((i, j), None)

    rec(0, 1.0 + 0j)
    return total
