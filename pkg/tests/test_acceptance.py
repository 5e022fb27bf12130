"""The nine acceptance criteria, one test each; each prints a PASS/FAIL line."""
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction


from curvlab.balls import Aligned, AllRealized, lemma_general_scan, scan_ball_pairs
from curvlab.bounds import constants_bounds, delta_linear, meat_bound
from curvlab.catmodel import cat_test, ecc_kappa
from curvlab.divergence import estimate_e, estimate_f_D
from curvlab.generators import GenSpec, generate
from curvlab.hyperbolicity import bigon_fatness, delta_four_point, delta_slim, geodesic_bigon, synchronous_scan
from curvlab.metric import enumerate_geodesics, subdivide
from suite import small_suite

import mpmath


def _line(announce, k, ok, detail):
    announce(f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_trees_are_exact(announce):
    start = time.perf_counter()
    bad = []
    for i in range(25):
        tree = generate(GenSpec("tree", n=12 + 2 * i, seed=i))
        space = subdivide(tree, 1)
        scan = scan_ball_pairs(space, Aligned(Fraction(1, 2)), hausdorff=True)
        d4, _ = delta_four_point(space)
        if scan.max_ecc != 0 or scan.max_hausdorff != 0 or d4 != 0:
            bad.append((i, scan.max_ecc, scan.max_hausdorff, d4))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed <= 60
    _line(announce, 1, ok, f"25 subdivided trees, ecc/hausdorff/delta4 all 0: {not bad}; {elapsed:.1f}s (limit 60s)")
    assert not bad, bad
    assert elapsed <= 60


def test_criterion_2_hyperbolic_implies_bounded_eccentricity(announce):
    failures = []
    for label, space in small_suite():
        slim = delta_slim(space)
        assert slim.exact
        scan = scan_ball_pairs(space, AllRealized(), hausdorff=True)
        cap = 2 * slim.value + 2 * space.slack
        if scan.max_ecc > cap or scan.max_hausdorff > cap:
            failures.append((label, scan.max_ecc, scan.max_hausdorff, slim.value))
    _line(announce, 2, not failures, f"ecc and nearest-ball Hausdorff <= 2*delta_slim + 2*slack on {len(small_suite())} spaces; violations {failures}")
    assert not failures


def test_criterion_2_enumeration_agrees_with_dag(announce):
    # the exhaustive geodesic enumeration and the widest-path pass give the same value
    for label, space in small_suite():
        if space.n > 20:
            continue
        a = delta_slim(space)
        b = delta_slim(space, method="enumerate")
        assert b.exact, label
        assert a.value == b.value, label


def test_criterion_3_inscribed_ball_lemmas(announce):
    problems = []
    totals = [0, 0]
    strict = {}
    for label, space in small_suite():
        res = lemma_general_scan(space)
        totals[0] += res.upper_checked
        totals[1] += res.containment_checked
        if res.upper_strict:
            # only spaces with unequal edge weights get a slack allowance
            assert res.upper_allowance == space.slack
            strict[label] = res.upper_strict
        if not res.ok:
            problems.append((label, res.upper_violations[:2], res.containment_violations[:2]))
    ok = not problems
    _line(
        announce,
        3,
        ok,
        f"part (2) cells {totals[0]}, part (1) centers {totals[1]}, violations {problems}; "
        f"within-slack excesses on mixed-weight spaces {strict}",
    )
    assert ok


def test_criterion_4_synchronous_lemma(announce):
    problems = []
    configs = 0
    for label, space in small_suite():
        res = synchronous_scan(space)
        configs += res.configurations
        if not res.ok:
            problems.append((label, res.violations[:3]))
    _line(announce, 4, not problems, f"{configs} geodesic-pair configurations, violations {problems}")
    assert not problems


def test_criterion_5_non_hyperbolic_witnesses(announce):
    eccs = []
    for n in (4, 6, 8, 10):
        scan = scan_ball_pairs(generate(GenSpec("grid", n=n)), AllRealized(), hausdorff=False)
        eccs.append(scan.max_ecc)
    monotone = all(a <= b for a, b in zip(eccs, eccs[1:]))
    big = eccs[-1] >= Fraction(10, 4)
    fat = []
    for m in (1, 2, 3, 4):
        cyc = generate(GenSpec("cycle", n=4 * m))
        paths, _ = enumerate_geodesics(cyc, 0, 2 * m)
        assert len(paths) == 2
        fat.append(bigon_fatness(cyc, geodesic_bigon(cyc, paths[0], paths[1])))
    fat_ok = fat == [1, 2, 3, 4]
    ok = monotone and big and fat_ok
    _line(announce, 5, ok, f"grid ecc {[str(e) for e in eccs]} (monotone {monotone}, >= 10/4 {big}); C_4m fatness {[str(f) for f in fat]}")
    assert ok


def test_criterion_6_bounds_arithmetic(announce):
    meat = meat_bound(3, 1, 2)
    N, _ = constants_bounds(0)
    with mpmath.workprec(4096):
        exact_log = mpmath.log(mpmath.mpf(int(N.exact)), 2)
        rel = abs(exact_log - N.log2) / abs(N.log2)
    ratios = []
    for eps in ("1/4", "1/2", "1", "2", "4"):
        v = delta_linear(Fraction(eps))
        ratios.append((v.scale / Fraction(eps), v.base))
    same = len(set(ratios)) == 1 and ratios[0][0] == 1
    ok = meat.exact == 3049 and rel <= 1e-9 and same
    _line(announce, 6, ok, f"meat_bound(3,1,2)={meat.exact}; N_bound(0) log2 rel err {float(rel):.1e}; delta_linear/eps identical: {same}")
    assert ok


def test_criterion_7_ecc_kappa_and_cat(announce):
    a = abs(ecc_kappa(0, 1, 1, 1) - (math.sqrt(3) / 2 - 0.5))
    b = abs(ecc_kappa(0, 3, 4, 5) - (math.sqrt(5.8) - 1))
    rng = random.Random(0)
    negative = 0
    for _ in range(10_000):
        s, t = rng.uniform(0, 10), rng.uniform(0, 10)
        d = rng.uniform(abs(s - t), s + t)
        kappa = rng.choice([0.0, -rng.uniform(0.01, 2)])
        if ecc_kappa(kappa, s, t, d) < -1e-9:
            negative += 1
    degenerate = max(abs(ecc_kappa(k, s, s + d, d)) for k in (0, -1) for s, d in ((1, 2), (3, 0.5), (0, 4)))
    c12 = cat_test(generate(GenSpec("cycle", n=12)), 0.0)
    trees = [cat_test(generate(GenSpec("tree", n=15, seed=s)), k) for s in range(3) for k in (0.0, -1.0)]
    ok = (
        a <= 1e-12
        and b <= 1e-12
        and negative == 0
        and degenerate <= 1e-9
        and c12.max_margin is not None
        and c12.max_margin > 1
        and all(not r.violations for r in trees)
    )
    _line(
        announce,
        7,
        ok,
        f"oracle errors {a:.1e}, {b:.1e}; negatives {negative}/10000; degenerate {degenerate:.1e}; "
        f"C12 max margin {c12.max_margin}; tree violations {sum(len(r.violations) for r in trees)}",
    )
    assert ok


def test_criterion_8_divergence(announce):
    start = time.perf_counter()
    bt = generate(GenSpec("binary-tree", depth=7))
    f = estimate_f_D(bt, 2, 6)
    e = estimate_e(bt, 2, 6)
    tree_f = [f.value(r) == 2 + 2 * r for r in range(7)]
    tree_e = [e.value(r) is None for r in range(1, 7)]
    grid = generate(GenSpec("grid", n=15))
    g = estimate_f_D(grid, 2, 8)
    grid_vals = [g.value(r) for r in range(1, 9)]
    grid_ok = all(v == 2 for v in grid_vals)
    elapsed = time.perf_counter() - start
    ok = all(tree_f) and all(tree_e) and grid_ok and elapsed <= 120
    _line(
        announce,
        8,
        ok,
        f"binary tree f=2+2r: {all(tree_f)}, e=inf: {all(tree_e)}; 15x15 grid f_2(1..8) = {[str(v) for v in grid_vals]} "
        f"(expected 2; geodesics that split and meet again give 0, witness {g.witnesses.get(1)}); {elapsed:.1f}s",
    )
    assert all(tree_f) and all(tree_e) and elapsed <= 120
    assert grid_ok, "literal f_D on the grid is 0: see the decisions ledger"


def _run(args):
    cmd = [sys.executable, "-m", "curvlab.cli", *args]
    res = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    assert res.returncode in (0, 2), res.stderr
    return res.stdout


def test_criterion_9_determinism(announce, tmp_path):
    files = []
    for spec in (GenSpec("tree", n=14, seed=4), GenSpec("cycle", n=8), GenSpec("random-graph", n=12, m=5, seed=9)):
        path = tmp_path / f"{spec.kind}.txt"
        _run(["gen", "--kind", spec.kind, "--n", str(spec.n), "--m", str(spec.m), "--seed", str(spec.seed), "--out", str(path)])
        files.append(path)
    jobs = []
    for path in files:
        jobs.append(["analyze", "--input", str(path), "--subdivide", "1", "--radius-policy", "aligned", "--diverge", "1", "--r-max", "3", "--json"])
        jobs.append(["ecc", "--input", str(path), "--radius-policy", "sampled:200", "--seed", "5", "--json"])
        jobs.append(["cat", "--input", str(path), "--kappa", "-0.5", "--samples", "300", "--seed", "2", "--json"])
        jobs.append(["diverge", "--input", str(path), "--D", "2", "--r-max", "4", "--base-budget", "5", "--seed", "3", "--json"])
    jobs.append(["bounds", "--eps", "1/2", "--json"])
    mismatched = []
    for job in jobs:
        outs = {_run(job + ["--threads", th]) for th in ("1", "4") for _ in range(2)}
        json.loads(next(iter(outs)))
        if len(outs) != 1:
            mismatched.append(job[0])
    _line(announce, 9, not mismatched, f"{len(jobs)} CLI jobs x 2 runs x 2 thread counts byte-identical; mismatches {mismatched}")
    assert not mismatched
