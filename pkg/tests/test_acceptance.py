"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line. The suites run
once per session with the default configuration.
"""

import time

import pytest

from bogc_tilt.cli.config import SUITES, config_from_dict
from bogc_tilt.cli.report import bundle, canonical_json
from bogc_tilt.cli.suites import run_one, run_suite
from threadpoolctl import threadpool_limits

CONFIG = config_from_dict({"suite": list(SUITES), "seed": 0})


@pytest.fixture(scope="module")
def runs():
    out = {}
    with threadpool_limits(limits=1):
        for name in SUITES:
            start = time.perf_counter()
            rep = run_one(CONFIG, name)
            out[name] = (rep, time.perf_counter() - start)
    return out


def records(runs, suite, *prefixes):
    rep, _ = runs[suite]
    assert rep.error is None, rep.error
    return [r for r in rep.records if r.name.startswith(prefixes)]


def verdict(pytestconfig, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line)
    assert ok, line


def failures(recs):
    return [r.name for r in recs if not r.passed]


def worst(recs):
    errs = [r.rel_err if r.rel_err is not None else r.lhs for r in recs]
    errs = [e for e in errs if isinstance(e, (int, float))]
    return max(errs) if errs else 0.0


def test_criterion_01_bogc_identity(runs, pytestconfig):
    recs = records(runs, "bogc", "bogc/")
    secs = runs["bogc"][1]
    ok = len(recs) == 8 and not failures(recs) and secs < 5
    verdict(pytestconfig, 1, ok, f"N=1..8 max rel err {worst(recs):.2e}, {secs:.2f} s")


def test_criterion_02_tilted_identity(runs, pytestconfig):
    recs = records(runs, "tilted", "tilted/")
    compared = [r for r in recs if not r.detail.get("skipped")]
    degen = records(runs, "tilted", "degenerate/")
    ok = len(recs) == 3 * 6 * 20 and not failures(recs) and not failures(degen)
    skipped = len(recs) - len(compared)
    verdict(pytestconfig, 2, ok, f"{len(compared)} samples compared, max rel err {worst(compared):.2e}, "
                                 f"{skipped} degenerate skipped, worst group {max(r.lhs for r in degen)}/20")


def test_criterion_03_rank_bound(runs, pytestconfig):
    recs = records(runs, "tilted", "rank/")
    bad = failures(recs)
    verdict(pytestconfig, 3, bool(recs) and not bad, f"{len(recs)} samples, {len(bad)} rank violations")


def test_criterion_04_bialternant(runs, pytestconfig):
    recs = records(runs, "bialternant", "bialternant/", "schur-ssyt/")
    verdict(pytestconfig, 4, bool(recs) and not failures(recs),
            f"{len(recs)} checks, max rel err {worst(recs):.2e}")


def test_criterion_05_grothendieck_beta0(runs, pytestconfig):
    recs = records(runs, "bialternant", "grothendieck-beta0/")
    bad = failures(recs)
    g_bad = [n for n in bad if "/G/" in n]
    gt_bad = [n for n in bad if "/G_tilde/" in n]
    verdict(pytestconfig, 5, bool(recs) and not bad,
            f"G: {len(g_bad)} of {len(recs) // 2} fail; G_tilde: {len(gt_bad)} of {len(recs) // 2} fail "
            "(G_tilde at beta=0 is identically 1)")


def test_criterion_06_cauchy_binet(runs, pytestconfig):
    recs = records(runs, "cauchy-binet", "cauchy-binet/", "gessel/")
    cut = max(r.detail.get("cutoff", 0) for r in recs)
    verdict(pytestconfig, 6, bool(recs) and not failures(recs),
            f"{len(recs)} checks, largest cutoff {cut}, failures {failures(recs)}")


def test_criterion_07_szego(runs, pytestconfig):
    recs = records(runs, "bogc", "szego/")
    verdict(pytestconfig, 7, len(recs) == 3 and not failures(recs), f"max rel err {worst(recs):.2e}")


def test_criterion_08_flows(runs, pytestconfig):
    recs = records(runs, "flows", "flow-", "tau-log-derivative/")
    secs = runs["flows"][1]
    errs = [r.lhs if r.abs_err is None else r.abs_err for r in recs]
    ok = bool(recs) and not failures(recs) and secs < 30
    verdict(pytestconfig, 8, ok, f"{len(recs)} flow checks, max abs err {max(errs):.2e}, {secs:.2f} s")


def test_criterion_09_closure(runs, pytestconfig):
    recs = records(runs, "closure", "closure/")
    pairs = {r.name.split("/")[1]: r.lhs for r in recs}
    verdict(pytestconfig, 9, len(recs) == 2 and not failures(recs),
            f"rank pairs {pairs}, expected [12, 15]")


def test_criterion_10_bbp(runs, pytestconfig):
    recs = records(runs, "airy", "bbp-pushthrough/")
    secs = runs["airy"][1]
    ok = len(recs) == 9 and not failures(recs) and secs < 10
    verdict(pytestconfig, 10, ok, f"9 grid points, max |diff| {max(r.abs_err for r in recs):.2e}, "
                                  f"{secs:.2f} s")


def test_criterion_11_spiked(runs, pytestconfig):
    scaling = records(runs, "airy", "spiked-scaling/err_coeff", "spiked-scaling/err_kernel")
    kernel = records(runs, "airy", "spiked-kernel/")
    ok = len(scaling) == 2 and len(kernel) == 1 and not failures(scaling + kernel)
    vals = {r.name.split("/")[1]: [round(v, 4) for v in r.detail["values"]] for r in scaling}
    verdict(pytestconfig, 11, ok, f"{vals}, kernel max diff {kernel[0].lhs:.2e}")


def test_criterion_12_determinism(runs, pytestconfig):
    first = canonical_json(bundle([runs[name][0] for name in SUITES], CONFIG.to_json()))
    second = canonical_json(bundle(run_suite(CONFIG, threads=4), CONFIG.to_json()))
    ok = first == second and first.isascii()
    verdict(pytestconfig, 12, ok, f"sequential vs 4 threads, {len(first)} bytes, identical={first == second}")
