"""Check suites run by the command line tool.

Each suite maps a :class:`SuiteConfig` and a seeded generator to a list of
records. Suites never read the clock, so a fixed config and seed always give
the same records.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .. import __version__, airy, flows, operators, symfun, tilt
from ..series import LaurentSeries, factorize, make_rational_factor, make_rational_symbol
from .config import SUITES, SuiteConfig
from .report import Record, Report, bound, compare, flag, report_timestamp

BESSEL = {"type": "exponential", "times": [0.3]}
TWO_TIME = {"type": "exponential", "times": [0.2, 0.05]}
RATIONAL_MINUS = {"type": "rational", "plus": [], "minus": [0.3, 0.5]}


def suite_rng(seed: int, name: str) -> np.random.Generator:
    """Counter-based Philox stream keyed by the seed and the suite name."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, zlib.crc32(name.encode())])))


def symbol_label(sym: dict) -> str:
    if sym["type"] == "exponential":
        return "exp(" + ",".join(repr(float(t)) for t in sym["times"]) + ")"
    fmt = lambda pts: ",".join(repr(complex(p)) if complex(p).imag else repr(complex(p).real) for p in pts)
    return f"rat(+[{fmt(sym.get('plus', []))}],-[{fmt(sym.get('minus', []))}])"


def _half_width(cfg: SuiteConfig) -> int:
    return cfg.half_width if cfg.half_width is not None else 2 * cfg.M + 16


def _tilts_from_config(cfg: SuiteConfig) -> tilt.TiltFamily | None:
    if cfg.tilts is None:
        return None
    return tilt.TiltFamily.from_coefficients(cfg.tilts["xi"], cfg.tilts["theta"])


def suite_bogc(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("bogc")
    symbols = cfg.symbols or (BESSEL,)
    N_list = cfg.N_list or tuple(range(1, 9))
    M, hw = cfg.M, _half_width(cfg)
    out = []
    for sym in symbols:
        label = symbol_label(sym)
        fact = factorize(sym, hw)
        K = operators.bogc_kernel(fact, M)
        for N in N_list:
            out.append(compare(f"bogc/{label}/N={N}", operators.toeplitz_det(fact.phi, N),
                               operators.bogc_rhs(fact, N, M, K), cfg.tol, N=N, M=M))
        out.append(bound(f"wiener-hopf/{label}", operators.verify_wh_identity(fact, M), cfg.tol, M=M))
    for times in opts["szego_times"]:
        fact = factorize({"type": "exponential", "times": list(times)}, hw)
        K = operators.bogc_kernel(fact, M)
        expected = np.exp(-sum(r * t * t for r, t in enumerate(times, start=1)))
        out.append(compare(f"szego/{symbol_label({'type': 'exponential', 'times': times})}",
                           operators.fredholm_det(K).value, expected, cfg.tol, M=M))
    return out


def suite_tilted(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("tilted")
    symbols = cfg.symbols or (BESSEL, TWO_TIME, RATIONAL_MINUS)
    fixed = _tilts_from_config(cfg)
    N_list = (fixed.N,) if fixed is not None else (cfg.N_list or tuple(range(1, 7)))
    samples = 1 if fixed is not None else int(opts["samples"])
    M, hw = cfg.M, _half_width(cfg)
    out = []
    for sym in symbols:
        label = symbol_label(sym)
        fact = factorize(sym, hw)
        K = operators.bogc_kernel(fact, M).entries
        for N in N_list:
            skipped = 0
            for k in range(samples):
                tilts = fixed if fixed is not None else tilt.random_tilt_family(rng, N, int(opts["max_degree"]))
                name = f"tilted/{label}/N={N}/sample={k}"
                try:
                    rhs = tilt.tilted_fredholm_evaluate(fact, tilts, N, M, K=K)
                except tilt.DegenerateChartError as exc:
                    skipped += 1
                    out.append(flag(name, True, skipped=True, reason=str(exc)))
                    continue
                except tilt.ConsistencyError as exc:
                    out.append(flag(name, False, reason=str(exc)))
                    continue
                lhs = tilt.tilted_minor_direct(fact.phi, tilts, N)
                out.append(compare(name, lhs, rhs.value, cfg.tol, cond_Gamma=rhs.cond_Gamma,
                                   cond_B=rhs.cond_B, tilts=tilts.to_json()))
                out.append(bound(f"rank/{label}/N={N}/sample={k}", rhs.correction_rank,
                                 tilts.d_xi + tilts.d_theta))
            out.append(bound(f"degenerate/{label}/N={N}", skipped, int(opts["max_degenerate"]),
                             samples=samples))
    return out


def suite_bialternant(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("bialternant")
    Y = [complex(y) for y in opts["alphabet"]]
    N = len(Y)
    tol, beta_tol = float(opts["tol"]), float(opts["beta_tol"])
    hw = 64
    out = []
    parts = list(symfun.enumerate_partitions(int(opts["max_weight"]), N))
    for pts in opts["phi_plus"]:
        phi_plus = make_rational_factor(list(pts), "plus", hw) if pts else LaurentSeries.constant(1.0)
        tag = "1" if not pts else "rat(" + ",".join(repr(float(p)) for p in pts) + ")"
        for lam in parts:
            lhs, rhs = symfun.bialternant_factorization_check(symfun.schur_tilts(lam, N), Y,
                                                              phi_plus, N, hw)
            out.append(compare(f"bialternant/{tag}/lambda={list(lam.parts)}", lhs, rhs, tol))
    for lam in parts:
        s = symfun.schur_eval(lam, Y)
        out.append(compare(f"schur-ssyt/lambda={list(lam.parts)}", s, symfun.schur_tableaux(lam, Y), tol))
        for variant in ("G", "G_tilde"):
            g = symfun.grothendieck_eval(lam, 0.0, Y, variant)
            out.append(compare(f"grothendieck-beta0/{variant}/lambda={list(lam.parts)}", g, s, beta_tol))
            if variant == "G_tilde":
                # With every tilt equal to 1 the bialternant is det[y^{N-j}] / Delta = 1.
                out.append(compare(f"grothendieck-beta0-unit/G_tilde/lambda={list(lam.parts)}", g, 1.0,
                                   beta_tol))
            xi = symfun.grothendieck_tilts(lam, 0.5, N, variant)
            lhs, rhs = symfun.bialternant_factorization_check(xi, Y, LaurentSeries.constant(1.0), N, hw)
            out.append(compare(f"grothendieck-minor/{variant}/lambda={list(lam.parts)}", lhs, rhs, tol))
    return out


def suite_cauchy_binet(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("cauchy-binet")
    symbols = cfg.symbols or (BESSEL, TWO_TIME, {"type": "rational", "plus": [0.3], "minus": [0.5]})
    N_list = cfg.N_list or (1, 2, 3)
    cap = int(opts["max_cutoff"])
    hw = _half_width(cfg)
    fixed = _tilts_from_config(cfg)
    out = []
    for sym in symbols:
        label = symbol_label(sym)
        fact = factorize(sym, hw)
        for N in ((fixed.N,) if fixed is not None else N_list):
            families = [("given", fixed)] if fixed is not None else \
                [("trivial", tilt.TiltFamily.trivial(N)), ("random", tilt.random_tilt_family(rng, N, 2))]
            for tag, tilts in families:
                direct = tilt.tilted_minor_direct(fact.phi, tilts, N)
                res = symfun.cauchy_binet_sum(fact, tilts, N, tol=cfg.tol, hard_cap=cap)
                allowed = max(cfg.tol * max(1.0, abs(direct)), res.tail_estimate)
                rec = compare(f"cauchy-binet/{label}/N={N}/{tag}", res.partial_sum, direct, allowed,
                              relative=False, cutoff=res.cutoff, terms=res.terms,
                              tail_estimate=res.tail_estimate)
                rec.passed = rec.passed and res.cutoff <= cap
                out.append(rec)
    for plus, minus in zip(opts["gessel_plus"], opts["gessel_minus"]):
        phi = make_rational_symbol(plus, minus, hw)
        rhs = symfun.gessel_product(plus, minus)
        for N in (len(plus), len(plus) + 1):
            out.append(compare(f"gessel/+{list(plus)}/-{list(minus)}/N={N}",
                               operators.toeplitz_det(phi, N), rhs, cfg.tol))
    sk = symfun.skew_schur_expansion_check([0.3, 0.2], [0.4], (1,), (), 2, cutoff=30)
    out.append(compare("skew-schur/lambda=[1]/nu=[]", sk.partial_sum, sk.direct, cfg.tol, terms=sk.terms))
    return out


def suite_flows(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("flows")
    M, N, tol = int(opts["M"]), int(opts["N"]), float(opts["tol"])
    out = []
    tilts = _tilts_from_config(cfg) or tilt.random_tilt_family(rng, N, 2)
    N = tilts.N
    for times in opts["times"]:
        t = tuple(float(x) for x in times)
        label = symbol_label({"type": "exponential", "times": t})
        fact = flows.time_factorization(t, M)
        for r in opts["r"]:
            if r > len(t):
                continue
            for what, rep in (("hankel", flows.hankel_flow_report(t, r, M)),
                              ("kernel", flows.kernel_flow_report(t, r, M)),
                              ("block-tilted", flows.flow_rhs_Y(t, tilts, N, r, M)),
                              ("block-rectangular", flows.flow_rhs_Y(t, None, N, r, M, (N + 2, N + 2)))):
                out.append(bound(f"flow-{what}/{label}/r={r}", rep.max_abs_error, tol, fd_step=rep.fd_step))
            lei = np.max(np.abs(flows.flow_rhs_K(t, r, M) - flows.flow_rhs_K_leibniz(t, r, M)))
            out.append(bound(f"flow-leibniz/{label}/r={r}", float(lei), tol))
            analytic, numeric = flows.tau_log_derivative(t, tilts, N, r, M)
            out.append(compare(f"tau-log-derivative/{label}/r={r}", analytic, numeric, tol, relative=False))
        d = max(tilts.d_xi, tilts.d_theta)
        lhs, rhs = flows.banded_identity_residual(fact, tilts, N, N + d, N + d, M)
        out.append(compare(f"banded-resolvent/{label}", lhs, rhs, cfg.tol))
    return out


def suite_closure(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("closure")
    res = flows.closure_experiment(cfg.seed, N=int(opts["N"]), d=int(opts["d"]),
                                   sample_count=int(opts["samples"]), time_box=opts["time_box"],
                                   M=int(opts["M"]), rel_threshold=float(opts["threshold"]))
    expected = [int(x) for x in opts["expected"]]
    out = []
    for family, r in res.items():
        got = [r.rank_without_shifts, r.rank_with_shifts]
        out.append(Record(f"closure/{family}", got, expected, None, None, got == expected, None,
                          r.to_json()))
    return out


def suite_airy(cfg: SuiteConfig, rng: np.random.Generator) -> list[Record]:
    opts = cfg.suite_options("airy")
    order = int(opts["order"])
    out = []
    for w in opts["w"]:
        for s in opts["s"]:
            db, dp = airy.bbp_pushthrough_check(float(w), float(s), order)
            out.append(compare(f"bbp-pushthrough/w={w}/s={s}", db, dp, cfg.tol, relative=False))
    for s in opts["s"]:
        out.append(compare(f"nystrom-maps/s={s}", airy.airy_determinant(float(s), order, "log"),
                           airy.airy_determinant(float(s), order, "rational"), cfg.tol, relative=False))
    db, dp = airy.bbp_pushthrough_check(50.0, 1.0, order)
    out.append(compare("bbp-decoupling/w=50/s=1", dp, airy.airy_determinant(1.0, order), 1e-3,
                       relative=False))
    a, b = float(opts["a"]), float(opts["b"])
    params = airy.SpikedSymbolParams(a, b, float(opts["L_check"]), 1.0, 0.0)
    chk = airy.spiked_column_kernel_exact(params)
    out.append(bound(f"spiked-kernel/L={params.L}", chk.max_abs_diff, float(opts["kernel_tol"]),
                     N=chk.N, M=chk.M, tilt_tail=chk.tilt_tail))
    out.append(compare(f"spiked-boundary/L={params.L}", chk.boundary_value, chk.boundary_series, cfg.tol))
    out.append(bound(f"spiked-factor/L={params.L}", chk.factor_error, cfg.tol))
    direct, rhs = airy.spiked_tilted_chain(params)
    out.append(compare(f"spiked-chain/L={params.L}", direct, rhs, float(opts["chain_tol"])))
    rows = airy.spiked_scaling_check(a, b, tuple(float(L) for L in opts["L_list"]))
    table = [r.to_json() for r in rows]
    for key in ("err_coeff", "err_kernel", "err_factor"):
        vals = [r[key] for r in table]
        ratios = [vals[i + 1] / vals[i] for i in range(len(vals) - 1)]
        out.append(flag(f"spiked-scaling/{key}", airy.strictly_decreasing(vals), values=vals,
                        ratios=ratios, L=[r["L"] for r in table]))
    return out


SUITE_FUNCS: dict[str, Callable[[SuiteConfig, np.random.Generator], list[Record]]] = {
    "bogc": suite_bogc,
    "tilted": suite_tilted,
    "bialternant": suite_bialternant,
    "cauchy-binet": suite_cauchy_binet,
    "flows": suite_flows,
    "closure": suite_closure,
    "airy": suite_airy,
}
assert tuple(SUITE_FUNCS) == SUITES


def run_one(cfg: SuiteConfig, name: str) -> Report:
    rng = suite_rng(cfg.seed, name)
    try:
        records = SUITE_FUNCS[name](cfg, rng)
        error = None
    except Exception as exc:  # surfaced in the report, not fatal to other suites
        records, error = [], f"{type(exc).__name__}: {exc}"
    return Report(name, records, cfg.seed, __version__, report_timestamp(), error)


def thread_count() -> int:
    raw = os.environ.get("BOGC_TILT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_suite(cfg: SuiteConfig, threads: int | None = None) -> list[Report]:
    """Run the selected suites in dependency order; reports come back in that order."""
    threads = thread_count() if threads is None else max(1, threads)
    with threadpool_limits(limits=1):
        if threads == 1 or len(cfg.suites) <= 1:
            return [run_one(cfg, name) for name in cfg.suites]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda name: run_one(cfg, name), cfg.suites))
