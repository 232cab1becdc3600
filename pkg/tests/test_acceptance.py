"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines also appear in the
terminal summary) or ``python3 tests/test_acceptance.py`` for the bare lines.
Heavy runs are memoized so criteria 4 and 9 reuse the criterion 6 and 7
reports instead of recomputing them.
"""
import functools
import math
import sys
import time

import numpy as np
import pytest

from oracles import all_offline_optima
from setassoc import (CLOCK, FIFO, FLUSH_WHEN_FULL, FULL_FLUSH, INCREMENTAL, LFU, LRU, NONE,
                      REUSE_DISTANCE, BallsBinsParams, ClassVerdict, ExperimentConfig,
                      RehashConfig, SearchSpace, SetAssocCache, TraceSource, check_conservative,
                      check_lazy, compute_opt_cost,
                      exact_overflow_probability, lru_k, mc_overflow_probability,
                      mc_saturated_bins, miss_count, replay_witness, run_pair,
                      run_rehash_longrun, run_threshold_sweep)
from setassoc.ballsbins import lemma_delta, overflow_bound, saturation_lower_bound
from setassoc.classes import (CHECKS, CONFORMS, LAZY, MONOTONE_FAMILY, SELF_SIMILAR_FAMILY,
                              STABLE, STACK, _run, restrict)
from setassoc.experiments import final_rows, first_rows
from setassoc.io import render_report
from setassoc.policies import UnsupportedKind, new_policy

RESULTS = []  # (criterion, passed, detail), read by conftest for the summary

SPACE = SearchSpace(4, 8, (2, 3, 4))
AUDITED = (LRU, lru_k(2), LFU, FIFO, CLOCK, REUSE_DISTANCE, FLUSH_WHEN_FULL)


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append((n, ok, line))
    print(line)
    assert ok, line


# -- shared, memoized runs ------------------------------------------------------

@functools.lru_cache(maxsize=None)
def verdict(kind, pred):
    """Verdict of ``pred`` on ``kind`` over SPACE; None if the kind has no order family."""
    try:
        return CHECKS[pred](kind, SPACE)
    except UnsupportedKind:
        return None


def threshold_config(seeds=tuple(range(10))):
    return ExperimentConfig(k=4096, alpha_grid=(2, 512), delta="AUTO", c=1.0, kind=LRU,
                            trace_source=TraceSource.parse("mixed:s=32,t=4,exponent=1.0"),
                            seeds=seeds)


def rehash_config(seeds=tuple(range(10))):
    k = 1024
    return ExperimentConfig(experiment="REHASH-LONGRUN", k=k, alpha_grid=(16,), delta=0.125,
                            rehash=RehashConfig(FULL_FLUSH, threshold=k * k), seeds=seeds,
                            trace_source=TraceSource("cycler", (("repetitions", 2**14),)),
                            modes=(NONE, FULL_FLUSH, INCREMENTAL))


@functools.lru_cache(maxsize=None)
def threshold_run():
    t0 = time.perf_counter()
    reports = []
    rows = run_threshold_sweep(threshold_config(), reports)
    return rows, reports, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def rehash_run():
    t0 = time.perf_counter()
    reports = []
    rows = run_rehash_longrun(rehash_config(), reports)
    return rows, reports, time.perf_counter() - t0


def ballsbins_mc_cases():
    """(m, n, alpha) with n**m <= 10**6 spread over small and wide bin counts."""
    cases = []
    for n in (2, 3, 4, 6, 8, 16, 32, 100, 1000):
        for m in (2, 3, 4, 6, 8, 12, 16, 19):
            if n ** m > 10**6:
                continue
            for alpha in sorted({1, 2, m // 2, m - 1}):
                if 1 <= alpha < m:
                    cases.append((m, n, alpha))
    return cases


MC_TRIALS = 4000


def ballsbins_mc_results():
    out = []
    for i, (m, n, alpha) in enumerate(ballsbins_mc_cases()):
        est, se_est = mc_overflow_probability(BallsBinsParams(m, n, MC_TRIALS, seed=i), alpha)
        exact = float(exact_overflow_probability(m, n, alpha))
        se = max(se_est, math.sqrt(exact * (1 - exact) / MC_TRIALS))
        out.append((m, n, alpha, est, exact, se))
    return out


def overflow_grid_results():
    k, out = 4096, []
    for alpha in (64, 128, 256, 512):
        delta = lemma_delta(k, alpha)
        m = math.ceil((1 - delta) * k)
        est, se = mc_overflow_probability(BallsBinsParams(m, k // alpha, 10**4, seed=alpha), alpha)
        out.append((alpha, delta, est, se, overflow_bound(k, alpha, delta)))
    return out


def saturation_grid_results():
    out = []
    for n in (64, 256):
        for h in (4, 16):
            for eps in (0.25, 0.5):
                st = mc_saturated_bins(BallsBinsParams(n * h, n, 10**4, seed=n * 100 + h), eps)
                out.append((n, h, eps, st.frac_exceeding, st.stderr,
                            saturation_lower_bound(n, n * h, eps)))
    return out


def reuse_distance_witness():
    A, B, C, Y, Z = 0, 1, 2, 3, 4
    trace = [A, Y, Z, Z, Z, Z, A, B, Y, Y, B, C]
    return ClassVerdict(STABLE, str(REUSE_DISTANCE), False,
                        {"trace": trace, "subset": [A, B, C, Y], "item": C, "a": 4, "b": 3})


def random_opt_traces(count=1000, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        universe = int(rng.integers(2, 13))
        trace = rng.integers(0, universe, int(rng.integers(1, 201))).tolist()
        yield trace, int(rng.integers(1, 9))


# -- criteria -------------------------------------------------------------------

def test_criterion_1_class_audit():
    t0 = time.perf_counter()
    stable_ok = [k for k in (LRU, lru_k(2), LFU) if verdict(k, STABLE).passed]
    fail_ok = [k for k in (FIFO, CLOCK)
               if not verdict(k, STABLE).passed and replay_witness(k, verdict(k, STABLE))]
    reuse_stack = verdict(REUSE_DISTANCE, STACK).passed
    rv = verdict(REUSE_DISTANCE, STABLE)
    reuse_unstable = not rv.passed and replay_witness(REUSE_DISTANCE, rv)

    w = reuse_distance_witness()
    make = lambda c: new_policy(REUSE_DISTANCE, c)  # noqa: E731
    small_ev = _run(make, 3, restrict(w.witness["trace"], set(w.witness["subset"])))[2]
    big_ev = _run(make, 4, tuple(w.witness["trace"]))[2]
    explicit = replay_witness(REUSE_DISTANCE, w) and small_ev == {1} and big_ev == {0}
    elapsed = time.perf_counter() - t0

    ok = (len(stable_ok) == 3 and len(fail_ok) == 2 and reuse_stack and reuse_unstable
          and explicit and elapsed <= 60)
    report(1, ok, f"stable={[str(k) for k in stable_ok]} unstable-with-witness={[str(k) for k in fail_ok]} "
                  f"reuse stack={reuse_stack} unstable={reuse_unstable} "
                  f"explicit witness (R3 evicts B, R4 evicts A)={explicit} in {elapsed:.1f}s")


def test_criterion_2_hierarchy():
    violations = []
    for kind in AUDITED:
        v = {p: verdict(kind, p) for p in (LAZY, STACK, STABLE, CONFORMS, MONOTONE_FAMILY,
                                           SELF_SIMILAR_FAMILY)}
        holds = {p: bool(x and x.passed) for p, x in v.items()}
        if holds[STABLE] and holds[LAZY] and not holds[STACK]:
            violations.append((str(kind), "stable and lazy but not stack"))
        if (holds[MONOTONE_FAMILY] and holds[SELF_SIMILAR_FAMILY] and holds[CONFORMS]
                and holds[LAZY] and not holds[STABLE]):
            violations.append((str(kind), "monotone, self-similar, conforming and lazy but not stable"))
    report(2, not violations, f"{len(AUDITED)} kinds audited, violations={violations}")


def test_criterion_3_conservative_lazy():
    bad = []
    for kind in (LRU, FIFO, LFU, CLOCK):
        for check in (check_conservative, check_lazy):
            v = check(kind, SPACE)
            if not v.passed:
                bad.append(f"{kind} fails {v.predicate} on {v.witness}")
    for check in (check_conservative, check_lazy):
        v = check(FLUSH_WHEN_FULL, SPACE)
        if v.passed or not replay_witness(FLUSH_WHEN_FULL, v):
            bad.append(f"FLUSH-WHEN-FULL has no replayable {v.predicate} witness")
    report(3, not bad, "; ".join(bad) or "all four pass both, FLUSH-WHEN-FULL fails both with witnesses")


def test_criterion_4_ledger():
    rng = np.random.default_rng(4)
    kinds = (LRU, lru_k(2), LFU, FIFO, CLOCK, REUSE_DISTANCE, FLUSH_WHEN_FULL)
    violations, pairs = 0, 0
    for i in range(100):
        k = int(rng.choice([8, 16, 32, 64]))
        alpha = int(rng.choice([a for a in (1, 2, 4, 8, 16) if k % a == 0 and a < k]))
        kind = kinds[int(rng.integers(len(kinds)))]
        mode = (NONE, FULL_FLUSH, INCREMENTAL)[int(rng.integers(3))]
        rehash = RehashConfig(mode, threshold=int(rng.integers(k, 4 * k))) if mode != NONE else RehashConfig()
        ref = int(rng.integers(1, k + 1))
        trace = rng.integers(0, 3 * k, int(rng.integers(50, 1500))).tolist()
        rep = run_pair(trace, SetAssocCache(k, alpha, kind, i, rehash), kind, ref)
        violations += rep.ledger_violations
        pairs += 1
    _, sweep_reports, _ = threshold_run()
    _, rehash_reports, _ = rehash_run()
    adv = [r for *_, r in sweep_reports] + [r for *_, r in rehash_reports]
    adv_violations = sum(r.ledger_violations for r in adv)
    prefixes = sum(r.accesses for r in adv)
    report(4, violations == 0 and adv_violations == 0,
           f"{pairs} random pairs: {violations} violations; {len(adv)} adversary runs "
           f"({prefixes} prefixes): {adv_violations} violations")


def test_criterion_5_ballsbins():
    t0 = time.perf_counter()
    mc = ballsbins_mc_results()
    mc_bad = [c for c in mc if abs(c[3] - c[4]) > 4 * c[5]]
    grid = overflow_grid_results()
    grid_bad = [g for g in grid if g[2] - 4 * g[3] > g[4]]
    sat = saturation_grid_results()
    sat_bad = [s for s in sat if s[3] + 4 * s[4] < s[5]]
    elapsed = time.perf_counter() - t0
    ok = not (mc_bad or grid_bad or sat_bad) and elapsed <= 120
    report(5, ok, f"MC vs exact {len(mc) - len(mc_bad)}/{len(mc)}; overflow grid "
                  f"{len(grid) - len(grid_bad)}/{len(grid)}; saturation grid "
                  f"{len(sat) - len(sat_bad)}/{len(sat)} in {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_6_threshold():
    rows, _, elapsed = threshold_run()
    hi = [r for r in rows if r.alpha == 512]
    lo = [r for r in rows if r.alpha == 2]
    hi_ok = sum(r.ratio <= 1.05 for r in hi)
    lo_ok = sum(r.ratio >= 2 for r in lo)
    kp_ok = all(r.k_prime == 2048 for r in lo)
    ok = hi_ok >= 9 and lo_ok >= 9 and kp_ok and elapsed <= 600
    report(6, ok, f"alpha=512 ratio<=1.05 on {hi_ok}/10 (max {max(r.ratio for r in hi):.4f}); "
                  f"alpha=2 k'={lo[0].k_prime} ratio>=2 on {lo_ok}/10 "
                  f"(range {min(r.ratio for r in lo):.3f}-{max(r.ratio for r in lo):.3f}) "
                  f"in {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_7_rehash():
    rows, _, elapsed = rehash_run()
    fin, first = final_rows(rows), first_rows(rows)
    seeds = range(10)
    growth = [s for s in seeds if fin[NONE, s].ratio >= 2 * first[NONE, s].ratio]
    ff_ok = [s for s in seeds if fin[FULL_FLUSH, s].ratio <= 1.25]
    inc_ok = [s for s in seeds
              if abs(fin[INCREMENTAL, s].misses_sa - fin[FULL_FLUSH, s].misses_sa)
              <= 0.1 * fin[FULL_FLUSH, s].misses_sa]
    ok = len(growth) >= 1 and len(ff_ok) >= 8 and len(inc_ok) == 10 and elapsed <= 600
    ff = [fin[FULL_FLUSH, s].ratio for s in seeds]
    report(7, ok, f"NONE growth>=2x on {len(growth)}/10; FULL-FLUSH final<=1.25 on {len(ff_ok)}/10 "
                  f"(range {min(ff):.0f}-{max(ff):.0f}); INCREMENTAL within 10% on "
                  f"{len(inc_ok)}/10 in {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_8_opt():
    checked, mismatches = 0, 0
    for k in (1, 2, 3):
        for trace, best in all_offline_optima(4, 10, k):
            checked += 1
            mismatches += compute_opt_cost(trace, k) != best
    worse = sum(compute_opt_cost(t, k) > miss_count(LRU, k, t) for t, k in random_opt_traces())
    report(8, mismatches == 0 and worse == 0,
           f"{checked} exhaustive (trace, k) cases: {mismatches} mismatches; "
           f"OPT > LRU on {worse}/1000 random traces")


@pytest.mark.slow
def test_criterion_9_determinism():
    diffs = []
    rows, _, _ = threshold_run()
    for fmt in ("CSV", "JSON"):
        if render_report(rows, fmt) != render_report(run_threshold_sweep(threshold_config()), fmt):
            diffs.append(f"threshold {fmt}")
    rows7, _, _ = rehash_run()
    if render_report(rows7, "CSV") != render_report(run_rehash_longrun(rehash_config()), "CSV"):
        diffs.append("rehash CSV")
    audit_a = render_report([verdict(k, STABLE).as_dict() for k in AUDITED], "JSON")
    audit_b = render_report([CHECKS[STABLE](k, SPACE).as_dict() for k in AUDITED], "JSON")
    if audit_a != audit_b:
        diffs.append("class audit")
    if repr(ballsbins_mc_results()) != repr(ballsbins_mc_results()):
        diffs.append("balls-and-bins MC")
    if repr(saturation_grid_results()) != repr(saturation_grid_results()):
        diffs.append("saturation grid")
    opt_a = [compute_opt_cost(t, k) for t, k in random_opt_traces()]
    if opt_a != [compute_opt_cost(t, k) for t, k in random_opt_traces()]:
        diffs.append("OPT sample")
    report(9, not diffs, f"reruns differing: {diffs or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
