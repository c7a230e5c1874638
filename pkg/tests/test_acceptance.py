"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL criterion N`` line (visible with
``-s`` or in the captured output of a failing run).  Run just this file with

    pytest tests/test_acceptance.py -s
"""

import json
import time

import numpy as np
import pytest

from clonebench import suites
from clonebench.cli import main
from clonebench.qrom import bbbv_check

pytestmark = pytest.mark.acceptance

SEED = 1


def _report(capsys, n, ok, what, started):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {what} ({time.perf_counter() - started:.1f} s)"
    with capsys.disabled():
        print("\n" + line)
    return ok


def _check(capsys, n, what, results, limit=None):
    t0 = time.perf_counter()
    results = [r() for r in results]
    elapsed = time.perf_counter() - t0
    failures = [f for r in results for f in r.failures]
    passed = sum(r.counts[0] for r in results)
    checked = sum(r.counts[1] for r in results)
    ok = not failures and checked > 0 and (limit is None or elapsed < limit)
    _report(capsys, n, ok, f"{what}: {passed}/{checked} checks", t0)
    assert not failures, failures[:5]
    assert checked > 0
    if limit is not None:
        assert elapsed < limit, f"took {elapsed:.1f} s, limit {limit} s"


def test_criterion_1_honest_correctness(capsys):
    _check(capsys, 1, "honest correctness equals 1", [lambda: suites.suite_honest(SEED)], 10)


def test_criterion_2_trivial_baselines(capsys):
    _check(capsys, 2, "trivial baselines", [lambda: suites.suite_trivial(SEED)], 30)


def test_criterion_3_moe_bound(capsys):
    _check(capsys, 3, "entanglement game bound and see-saw", [lambda: suites.suite_moe(SEED)], 600)


def test_criterion_4_epr_reduction(capsys):
    _check(capsys, 4, "cloning value equals EPR entanglement-game value", [lambda: suites.suite_epr(SEED)], 300)


def test_criterion_5_ind_dep(capsys):
    _check(capsys, 5, "correlated vs independent challenges",
           [lambda: suites.suite_ind_dep(SEED), lambda: suites.suite_classical_ind_dep(SEED)], 120)


def test_criterion_6_goldreich_levin(capsys):
    _check(capsys, 6, "inner-product extraction", [lambda: suites.suite_gl(SEED)], 300)


def test_criterion_7_value_estimation(capsys):
    _check(capsys, 7, "value estimation", [lambda: suites.suite_valest(SEED), lambda: suites.suite_nl_valest(SEED)],
           600)


@pytest.mark.xfail(strict=True, reason="the eps/2 trace-distance bound is violated by exact simulation; "
                                       "the hybrid bound 2 eps holds and is checked separately")
def test_criterion_8_bbbv_stated_bound(capsys):
    t0 = time.perf_counter()
    reps = [bbbv_check(c, t, p) for _, c, t, p in suites.bbbv_instances(SEED, 1000)]
    bad = sum(not r.passed for r in reps)
    worst = max(r.lhs / r.rhs for r in reps if r.rhs > 0)
    _report(capsys, 8, bad == 0, f"trace distance <= eps/2 on 1000 circuits: {bad} violations, "
                                 f"worst ratio {worst:.3f}", t0)
    assert bad == 0


def test_criterion_8_bbbv_hybrid_bound_and_subset_hiding(capsys):
    _check(capsys, "8 (hybrid 2 eps bound, subset hiding)", "reprogramming checks",
           [lambda: suites.suite_bbbv(SEED)], 300)


def test_criterion_9_spectral(capsys):
    _check(capsys, 9, "two-projector decomposition and thresholds", [lambda: suites.suite_spectral(SEED)], 120)


def test_criterion_10_min_entropy(capsys):
    _check(capsys, 10, "min-entropy transfer", [lambda: suites.suite_min_entropy(SEED)], 120)


def test_criterion_11_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    texts = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["verify", "all", "--seed", str(SEED), "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        rep.pop("generated_at")
        texts.append(json.dumps(rep, sort_keys=True, indent=2))
    ok = texts[0] == texts[1]
    n = len(json.loads(texts[0])["records"])
    _report(capsys, 11, ok, f"two verify-all runs identical apart from the timestamp ({n} records)", t0)
    assert ok
