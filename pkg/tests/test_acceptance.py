"""Acceptance gate: every exit criterion as one test with a printed verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  All randomness is seeded, so the suite is reproducible bit for bit.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bdtest import (
    BloatedGrid,
    BoundingFamily,
    FunctionTable,
    HypergridDomain,
    LineTesterPlan,
    ProductDistribution,
    TesterConfig,
    check_metric_axioms,
    default_iterations,
    dimension_reduction_check,
    estimate_rejection,
    gen_far,
    gen_member,
    hypergrid_tester,
    isotonic_l1_oracle,
    l2_tester,
    line_tester,
    matching_weight,
    product_tester,
    symmetrize,
    violation_score,
    build_violation_graph,
    max_weight_matching,
)
from bdtest.harness import ExperimentConfig, run_experiment
from conftest import random_finite_bounds, random_int_table


def report(number, name, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number:>2} {name}: {tag} {detail}")
    assert passed, f"criterion {number} ({name}) failed: {detail}"


def test_criterion_01_matching_equals_isotonic_oracle():
    rng = np.random.default_rng(101)
    start = time.time()
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        f = random_int_table(rng, n, 1, 0, int(rng.integers(2, 10)))
        B = BoundingFamily.monotone(n, 1)
        if matching_weight(f, B) != isotonic_l1_oracle(f):
            report(1, "matching equals isotonic oracle", False, f"mismatch on {f.values}")
        checked += 1
    elapsed = time.time() - start
    report(
        1,
        "matching equals isotonic oracle",
        checked == 1000 and elapsed < 10.0,
        f"({checked} instances, {elapsed:.1f}s)",
    )


def test_criterion_02_metric_axioms_exhaustive():
    rng = np.random.default_rng(202)
    failures = 0
    triples_total = 0
    for n, d in ((4, 2), (3, 3)):
        dom = HypergridDomain(n, d)
        pts = list(dom.points())
        for _ in range(50):
            B = random_finite_bounds(rng, n, d)
            rep = check_metric_axioms(B, itertools.product(pts, pts, pts))
            triples_total += rep.triples_checked
            if not rep.ok:
                failures += 1
    report(
        2,
        "quasimetric axioms hold exhaustively",
        failures == 0,
        f"({triples_total} triples over 100 random families)",
    )


def test_criterion_03_symmetrization_preserves_scores_and_matching():
    rng = np.random.default_rng(303)
    bad = 0
    for _ in range(500):
        n = int(rng.integers(2, 9))
        B = random_finite_bounds(rng, n, 1, lo=-3, hi=3, max_gap=5)
        f = random_int_table(rng, n, 1, 0, 8)
        out = symmetrize(f, B.lower[0], B.upper[0])
        B2 = BoundingFamily(HypergridDomain(n, 1), (out.lower,), (out.upper,))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if violation_score(f, B, (i,), (j,)) != violation_score(
                    out.table, B2, (i,), (j,)
                ):
                    bad += 1
        if matching_weight(f, B) != matching_weight(out.table, B2):
            bad += 1
    report(3, "symmetrization preserves scores and matching weight", bad == 0,
           "(500 line instances, exact)")


def test_criterion_04_dimension_reduction():
    rng = np.random.default_rng(404)
    failures = 0

    def bounds_for(n, d, k):
        if k == 0:
            return BoundingFamily.monotone(n, d)
        if k == 1:
            return BoundingFamily.lipschitz(n, d, int(rng.integers(1, 4)))
        return random_finite_bounds(rng, n, d, lo=-3, hi=3)

    for count, (n, d) in ((500, (4, 2)), (200, (3, 3))):
        for i in range(count):
            B = bounds_for(n, d, i % 3)
            f = random_int_table(rng, n, d, 0, 8)
            if not dimension_reduction_check(f, B).ok:
                failures += 1
    report(4, "line restrictions keep half the violation mass", failures == 0,
           "(500 on [4]^2 + 200 on [3]^3, exact oracles)")


def test_criterion_05_refined_grid_preserves_distance_and_mass():
    rng = np.random.default_rng(505)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 5))
        denom = int(rng.integers(n, 9))
        masses = _random_masses(rng, n, denom)
        D = ProductDistribution(HypergridDomain(n, 1), (tuple(masses),), denom)
        B = BoundingFamily.monotone(n, 1)
        f = random_int_table(rng, n, 1, 0, 6)
        bg = BloatedGrid(D)
        f_ext = bg.extend_function(f)
        refined = max_weight_matching(
            build_violation_graph(f_ext, bg.extend_metric(B))
        ).weight
        weighted = isotonic_l1_oracle(f, weights=masses)
        if weighted != refined:
            bad += 1

    mass_bad = 0
    D = ProductDistribution(HypergridDomain(3, 2), ((1, 1, 2), (2, 1, 1)), 4)
    bg = BloatedGrid(D)
    pts = list(D.domain.points())
    for _ in range(200):
        k = int(rng.integers(0, len(pts) + 1))
        idx = rng.choice(len(pts), size=k, replace=False)
        X = [pts[int(i)] for i in idx]
        Z = set()
        for x in X:
            Z.update(bg.preimage_points(x))
        if D.mass(X) != Fraction(len(Z), bg.target.size):
            mass_bad += 1
    report(
        5,
        "refined grid preserves distance and mass",
        bad == 0 and mass_bad == 0,
        "(200 weighted-oracle identities + 200 exact set masses)",
    )


def _random_masses(rng, n, denom):
    # positive integer masses summing to denom
    cuts = sorted(rng.choice(np.arange(1, denom), size=n - 1, replace=False)) if n > 1 else []
    edges = [0] + [int(c) for c in cuts] + [denom]
    return [edges[i + 1] - edges[i] for i in range(n)]


def test_criterion_06_every_matched_pair_forces_many_violations():
    rng = np.random.default_rng(606)
    failures = 0
    for _ in range(500):
        n = int(rng.integers(3, 33))
        B = random_finite_bounds(rng, n, 1, lo=-3, hi=3, max_gap=5)
        f = random_int_table(rng, n, 1, 0, 2 * n)
        out = symmetrize(f, B.lower[0], B.upper[0])
        B2 = BoundingFamily(HypergridDomain(n, 1), (out.lower,), (out.upper,))
        graph = build_violation_graph(out.table, B2)
        if graph.is_empty:
            continue
        total = len(graph.edges)
        u_max = Fraction(max(out.upper))
        for _, _, score in max_weight_matching(graph).edges:
            if total < min(Fraction(score) / (2 * u_max), n - 1):
                failures += 1
    report(6, "matched pairs force many violated pairs", failures == 0,
           "(500 line instances, exhaustive counts, n <= 32)")


def _completeness_instances(rng):
    """100 in-class instances spread over the four tester families."""
    out = []
    for i in range(25):
        n = int(rng.integers(4, 17))
        c = int(rng.integers(1, 3))
        B = BoundingFamily.constant(n, 1, -c, c)
        f = gen_member(B, rng)
        out.append(("line", f, B, None))
    for _ in range(25):
        B = BoundingFamily.constant(4, 2, -1, 1)
        out.append(("hypergrid", gen_member(B, rng), B, None))
    for _ in range(25):
        B = BoundingFamily.constant(4, 2, -1, 1)
        out.append(("l2", gen_member(B, rng), B, None))
    for i in range(25):
        n = 6
        B = BoundingFamily.constant(n, 1, -1, 1)
        masses = _random_masses(rng, n, 8)
        D = ProductDistribution(HypergridDomain(n, 1), (tuple(masses),), 8)
        out.append(("product", gen_member(B, rng), B, D))
    return out


def test_criterion_07_one_sidedness_across_all_testers():
    rng = np.random.default_rng(707)
    rejections = 0
    runs = 0
    for tester, f, B, D in _completeness_instances(rng):
        if tester == "line":
            plan = LineTesterPlan(B.lower[0], B.upper[0], value_range=f.bounds_range)
            for seed in range(100):
                rejections += plan.run(f, seed).rejected
                runs += 1
        elif tester == "hypergrid":
            cfg = TesterConfig(epsilon=0.4)
            for seed in range(100):
                rejections += hypergrid_tester(f, B, cfg, seed).rejected
                runs += 1
        elif tester == "l2":
            cfg = TesterConfig(epsilon=0.65, p=2)
            for seed in range(100):
                rejections += l2_tester(f, B, cfg, seed).rejected
                runs += 1
        else:
            cfg = TesterConfig(epsilon=0.4)
            for seed in range(100):
                rejections += product_tester(f, B, D, cfg, seed).rejected
                runs += 1
    report(7, "members are never rejected", rejections == 0 and runs == 10_000,
           f"({runs} tester runs)")


def test_criterion_08_single_shot_soundness_on_planted_lines():
    start = time.time()
    n = 64
    B = BoundingFamily.constant(n, 1, -1, 1)
    trials = 100_000
    results = []
    for k, target in enumerate((0.1, 0.2, 0.4)):
        gen_rng = np.random.default_rng([808, k])
        inst = gen_far(B, target, gen_rng, integer_steps=True)
        eps = inst.measured_eps
        assert inst.oracle_used and eps is not None and eps >= target
        plan = LineTesterPlan(B.lower[0], B.upper[0], value_range=inst.table.bounds_range)
        est = estimate_rejection(
            lambda r: plan.run(inst.table, r), trials, np.random.default_rng([809, k])
        )
        bound = eps / 4  # C = 1 for mirror-image unit bounds
        results.append((eps, est.rate, est.lower, bound, est.lower >= bound))
    elapsed = time.time() - start
    ok = all(r[-1] for r in results) and elapsed < 60
    detail = "; ".join(
        f"eps={e:.3f} rate={r:.4f} lo={lo:.4f} >= {b:.4f}" for e, r, lo, b, _ in results
    )
    report(8, "single-shot rejection meets eps/4", ok, f"({detail}; {elapsed:.1f}s)")


def test_criterion_09_full_tester_rejects_two_thirds():
    B = BoundingFamily.constant(4, 2, -1, 1)
    inst = gen_far(B, 0.25, np.random.default_rng(909), integer_steps=True)
    assert inst.measured_eps is not None and inst.measured_eps >= 0.25
    cfg = TesterConfig(epsilon=0.25)
    runs = 1000
    rejected = sum(
        hypergrid_tester(inst.table, B, cfg, seed).rejected for seed in range(runs)
    )
    report(
        9,
        "full tester rejects far inputs",
        rejected / runs >= 2 / 3,
        f"(oracle eps={inst.measured_eps:.3f}, rejected {rejected}/{runs})",
    )


def test_criterion_10_query_counts_scale_linearly():
    # seed chosen so every member instance spans more than the smallest step
    # bound; otherwise the candidate set is empty and the run needs no queries
    cfg = ExperimentConfig(
        grids=((8, 1), (8, 2), (8, 3)),
        bounds=({"kind": "constant", "lower": -1, "upper": 1},),
        epsilons=(0.1, 0.2, 0.4),
        kinds=("member",),
        testers=("hypergrid", "l2"),
        trials=100,
        seed=2020,
    )
    rep = run_experiment(cfg)
    rows = [r for r in rep.rows if r.error is None and r.verdict == "accept"]
    assert len(rows) == len(rep.rows) == 18

    def fit_r2(xs, ys):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        slope, intercept = np.polyfit(xs, ys, 1)
        pred = slope * xs + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        return slope, 1 - ss_res / ss_tot

    hg = [r for r in rows if r.tester == "hypergrid"]
    slope_h, r2_h = fit_r2([r.d / r.epsilon for r in hg], [r.queries for r in hg])

    l2 = [r for r in rows if r.tester == "l2"]
    slope_l, r2_l = fit_r2([r.d / r.epsilon**2 for r in l2], [r.queries for r in l2])

    # measured counts must equal the closed-form budget exactly
    formula_ok = all(
        r.queries == 2 * default_iterations(r.epsilon, r.d, 1.0) for r in hg
    ) and all(r.queries == 2 * default_iterations(r.epsilon**2, r.d, 1.0) for r in l2)

    ok = r2_h >= 0.99 and r2_l >= 0.99 and formula_ok and slope_h > 0 and slope_l > 0
    report(
        10,
        "query counts scale as d over the proximity budget",
        ok,
        f"(R2 linear={r2_h:.5f}, R2 squared-budget={r2_l:.5f})",
    )
