"""Acceptance gate: one test per criterion, each printed as a pass/fail
line in the terminal summary.  Tolerances and runtime budgets are pinned
here; nothing is deferred to later calibration."""

import itertools
import json
import math
import time

import numpy as np

import sparsedisc as sd
from sparsedisc.cli import main as cli_main
from sparsedisc.small_sets import worst_case_bound

from conftest import independent_items, mixed_instance, random_function, \
    random_row_stochastic, record_acceptance


def timed(fn):
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def test_criterion_1_extension_matches_enumeration():
    def body():
        rng = np.random.default_rng(101)
        worst = 0.0
        for _ in range(500):
            n = int(rng.integers(2, 13))  # support stays within 12 items
            fn = random_function(rng, n)
            x = rng.uniform(0, 1, n)
            worst = max(worst, abs(sd.eval_F(fn, x) - sd.eval_F_enumeration(fn, x)))
        return worst

    worst, elapsed = timed(body)
    ok = worst <= 1e-9 and elapsed < 10
    record_acceptance(
        "1 closed-form extension == enumeration on 500 pairs (tol 1e-9)",
        ok, f"max err {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 10


def test_criterion_2_restricted_linearity():
    def body():
        rng = np.random.default_rng(202)
        worst = 0.0
        rejected = 0
        for _ in range(200):
            n = int(rng.integers(4, 13))
            fn = random_function(rng, n)
            Y = random_row_stochastic(rng, n, 2)
            D = independent_items(fn, rng, n, want=4)
            alpha = float(rng.uniform(0, 1))
            for c in range(2):
                x = Y[:, c].copy()
                y = Y[:, c].copy()
                x[list(D)] = rng.uniform(0, 1, len(D))
                y[list(D)] = rng.uniform(0, 1, len(D))
                lhs = sd.eval_F(fn, alpha * x + (1 - alpha) * y)
                rhs = alpha * sd.eval_F(fn, x) + (1 - alpha) * sd.eval_F(fn, y)
                worst = max(worst, abs(lhs - rhs))
            # a set with two items of D must be rejected
            big_sets = [s for s in fn.sets if len(s) >= 2]
            if big_sets:
                bad_D = list(big_sets[0][:2])
                try:
                    sd.restricted_form(fn, Y, bad_D)
                except ValueError:
                    rejected += 1
        return worst, rejected

    (worst, rejected), elapsed = timed(body)
    ok = worst <= 1e-8 and rejected > 0 and elapsed < 10
    record_acceptance(
        "2 restricted extension affine on independent D (tol 1e-8), "
        "dependent D rejected",
        ok, f"max err {worst:.2e}, {rejected} rejections, {elapsed:.1f}s")
    assert worst <= 1e-8
    assert rejected > 0
    assert elapsed < 10


def test_criterion_3_rounding_in_expectation():
    def body():
        from sparsedisc.lp import LinearSystem, round_in_expectation

        worst_resid = 0.0
        worst_frac = 0
        rng = np.random.default_rng(303)
        for trial in range(5):
            r = int(rng.integers(1, 6))
            v = int(rng.integers(r + 1, 16))
            A = rng.normal(size=(r, v))
            x0 = rng.uniform(0.05, 0.95, size=v)
            system = LinearSystem(A, A @ x0)
            srng = np.random.default_rng(trial)
            for _ in range(400):
                x = round_in_expectation(system, x0, srng)
                worst_resid = max(worst_resid, float(np.abs(A @ x - system.b).max()))
                frac = int(((x > 1e-9) & (x < 1 - 1e-9)).sum())
                worst_frac = max(worst_frac, frac - r)
        # dedicated mean check on one fixed system
        r, v = 4, 12
        A = rng.normal(size=(r, v))
        x0 = rng.uniform(0.05, 0.95, size=v)
        system = LinearSystem(A, A @ x0)
        srng = np.random.default_rng(99)
        N = 20_000
        total = np.zeros(v)
        for _ in range(N):
            total += round_in_expectation(system, x0, srng)
        mean_dev = float(np.abs(total / N - x0).max())
        return worst_resid, worst_frac, mean_dev, 4 * math.sqrt(0.25 / N)

    (resid, frac_excess, mean_dev, mean_tol), elapsed = timed(body)
    ok = resid <= 1e-7 and frac_excess <= 0 and mean_dev <= mean_tol and elapsed < 30
    record_acceptance(
        "3 expectation-preserving rounding: residual<=1e-7, <=r fractional, "
        "means within 4 sigma over 20k samples",
        ok, f"resid {resid:.1e}, mean dev {mean_dev:.4f}<={mean_tol:.4f}, {elapsed:.1f}s")
    assert resid <= 1e-7
    assert frac_excess <= 0
    assert mean_dev <= mean_tol
    assert elapsed < 30


def test_criterion_4_small_sets_at_desk_scale():
    n, m, t, s = 200, 3, 3, 4

    def body():
        ks = itertools.cycle([2, 3, 4])
        caps_ok = True
        disc_ok = True
        for seed in range(20):
            k = next(ks)
            inst = sd.gen_random(n, m, t, (2, s), seed=1000 + seed)
            cfg = sd.SmallSetsConfig(k=k, max_set_size=s, seed=seed)
            Y, stats = sd.sparse_fractional_coloring(inst, cfg)
            caps_ok &= stats.final_fractional <= m * k * t * s
            caps_ok &= sd.frac_discrepancy(inst, Y) <= 1e-6
            chi, report = sd.solve_small_sets(inst, cfg)
            disc_ok &= report.success
            disc_ok &= report.discrepancy < worst_case_bound(m, t, k, s)
        # per-attempt success rate on one fixed instance
        fixed = sd.gen_random(n, m, t, (2, s), seed=777)
        wins = 0
        for seed in range(200):
            _, rep = sd.solve_small_sets(
                fixed, sd.SmallSetsConfig(k=2, max_set_size=s, seed=seed,
                                          retry_limit=1))
            wins += rep.success
        return caps_ok, disc_ok, wins / 200

    (caps_ok, disc_ok, rate), elapsed = timed(body)
    floor = 0.5 - 3 * math.sqrt(0.25 / 200)
    ok = caps_ok and disc_ok and rate >= floor and elapsed < 120
    record_acceptance(
        "4 small-sets: phase-1 cap m*k*t*s, frac disc<=1e-6, certified "
        "bound, success rate >= 0.39",
        ok, f"rate {rate:.2f}>={floor:.2f}, {elapsed:.1f}s")
    assert caps_ok and disc_ok
    assert rate >= floor
    assert elapsed < 120


def test_criterion_5_big_sets_zero_discrepancy():
    def body():
        combos = itertools.cycle([(1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 2),
                                  (3, 3), (3, 4), (1, 4), (2, 2)])
        zero_ok = True
        rainbow_ok = True
        total_resamples = 0
        total_expected = 0.0
        for seed in range(20):
            t, k = next(combos)
            s_big = sd.lll_threshold(t, k)
            inst = sd.gen_random(6 * s_big, 2, t, (s_big, s_big + 3),
                                 seed=2000 + seed)
            chi, report = sd.solve_big_sets(inst, k, seed=seed)
            zero_ok &= report.success and report.discrepancy == 0.0
            rainbow_ok &= all(
                sd.is_rainbow(dual, chi.chi, k) for _, dual in inst.all_sets()
            )
            total_resamples += report.phases["resamples"]
            total_expected += report.phases["expected_work"]
        return zero_ok, rainbow_ok, total_resamples, total_expected

    (zero_ok, rainbow_ok, resamples, expected), elapsed = timed(body)
    ok = zero_ok and rainbow_ok and resamples <= 10 * expected and elapsed < 120
    record_acceptance(
        "5 big-sets: discrepancy exactly 0, all sets rainbow, resamples "
        "within 10x expected work",
        ok, f"{resamples} resamples vs {expected:.0f} expected, {elapsed:.1f}s")
    assert zero_ok and rainbow_ok
    assert resamples <= 10 * expected
    assert elapsed < 120


def test_criterion_6_all_sets_at_desk_scale():
    def body():
        cases = [(2, 2, 31), (2, 3, 32), (3, 2, 33), (3, 3, 34)]
        results = []
        for t, k, seed in cases:
            inst = mixed_instance(2000, t, k, seed=seed)
            assert inst.t <= t
            chi, report = sd.solve_all_sets(inst, k, seed=seed, retry_limit=20)
            results.append(
                (
                    report.success,
                    report.verification["all_big_rainbow"],
                    report.verification["small_part_discrepancy"],
                    report.bound,
                    report.phases["max_batch_value_change"],
                    3 * report.t,
                    report.retries,
                )
            )
        return results

    results, elapsed = timed(body)
    ok = elapsed < 300
    for success, rainbow, disc_small, bound, change, cap3t, retries in results:
        ok &= success and rainbow and disc_small <= bound
        ok &= change <= cap3t + 1e-6
        ok &= retries <= 20
    record_acceptance(
        "6 all-sets n~2000: big sets rainbow (disc 0), small part within "
        "12*sqrt(t^3*s*ln(ntk)), batch steps <= 3t, retries <= 20",
        ok, f"{len(results)} instances, {elapsed:.1f}s")
    assert ok


def test_criterion_7_pipeline_unbiasedness():
    def body():
        inst = sd.CoverageInstance(
            n=6,
            functions=(sd.CoverageFunction(((0, 1), (2, 3), (4, 5))),),
        )
        k = 2
        runs = 2000
        counts = np.zeros((6, k))
        for seed in range(runs):
            chi, report = sd.solve_all_sets(inst, k, seed=seed)
            assert report.success
            counts[np.arange(6), chi.chi] += 1
        dev = float(np.abs(counts / runs - 1.0 / k).max())
        return dev, 4 * math.sqrt(0.25 / runs)

    (dev, tol), elapsed = timed(body)
    ok = dev <= tol and elapsed < 180
    record_acceptance(
        "7 unbiasedness: E[chi indicator] within 4 sigma of 1/k over 2000 runs",
        ok, f"max dev {dev:.4f} <= {tol:.4f}, {elapsed:.1f}s")
    assert dev <= tol
    assert elapsed < 180


def test_criterion_8_single_item_lower_bound():
    def body():
        t = 5
        inst = sd.CoverageInstance(
            n=1, functions=(sd.CoverageFunction(((0,),) * t),)
        )
        value, _ = sd.min_discrepancy_exhaustive(inst, 2)
        return value, t

    (value, t), elapsed = timed(body)
    ok = value == float(t) and elapsed < 1
    record_acceptance(
        "8 single item covering t elements has oracle minimum exactly t",
        ok, f"minimum {value} == {t}, {elapsed:.2f}s")
    assert value == float(t)
    assert elapsed < 1


def test_criterion_9_beck_fiala_reduction():
    def classical(n, hyperedges):
        best = None
        for chi in itertools.product((0, 1), repeat=n):
            worst = 0
            for H in hyperedges:
                ones = sum(chi[v] for v in H)
                worst = max(worst, abs(len(H) - 2 * ones))
            best = worst if best is None else min(best, worst)
        return best

    def body():
        rng = np.random.default_rng(909)
        agree = True
        for _ in range(10):
            n = int(rng.integers(5, 9))
            edges = [
                sorted(int(v) for v in rng.choice(
                    n, size=int(rng.integers(2, n + 1)), replace=False))
                for _ in range(int(rng.integers(1, 5)))
            ]
            inst = sd.gen_beck_fiala(n, edges)
            value, _ = sd.min_discrepancy_exhaustive(inst, 2)
            agree &= value == classical(n, edges)
        return agree

    agree, elapsed = timed(body)
    ok = agree and elapsed < 30
    record_acceptance(
        "9 coverage encoding of hypergraphs preserves the classical minimum "
        "discrepancy (10 random hypergraphs)",
        ok, f"{elapsed:.1f}s")
    assert agree
    assert elapsed < 30


def test_criterion_10_byte_deterministic_reruns(tmp_path):
    def body():
        small = sd.gen_random(40, 2, 2, (1, 3), seed=50)
        s_big = sd.lll_threshold(1, 2)
        big = sd.gen_random(6 * s_big, 2, 1, (s_big, s_big + 2), seed=51)
        mixed = mixed_instance(900, 2, 2, seed=52)
        jobs = [("small", small, "2"), ("big", big, "2"), ("all", mixed, "2")]
        identical = True
        for algo, inst, k in jobs:
            inst_file = tmp_path / f"{algo}.json"
            inst_file.write_text(sd.write_instance(inst), encoding="utf-8")
            blobs = []
            for tag in ("one", "two"):
                chi = tmp_path / f"{algo}-{tag}-chi.json"
                rep = tmp_path / f"{algo}-{tag}-rep.json"
                code = cli_main([
                    "solve", "--algo", algo, "--k", k, "--seed", "99",
                    "--in", str(inst_file), "--out", str(chi),
                    "--report", str(rep),
                ])
                assert code == 0
                blobs.append(chi.read_bytes() + rep.read_bytes())
            identical &= blobs[0] == blobs[1]
        return identical

    identical, elapsed = timed(body)
    record_acceptance(
        "10 solver reruns with identical seeds write byte-identical "
        "coloring and report files",
        identical, f"{elapsed:.1f}s")
    assert identical
