"""Acceptance criteria, one test per criterion; each records a PASS/FAIL line."""

import io
import json
import math
import time
from fractions import Fraction

import pytest

from choired import arith
from choired.census import CensusOptions, merge_reports, residue_class_crosscheck, run_census, tally_range
from choired.cli import main
from choired.curve import ap_from_ainvs, load_curve, prime_setting
from choired.density import (
    ORD,
    SS,
    all_partitions,
    cohen_lenstra_cp,
    density_choired,
    density_formulas,
    partition_modulus,
    residue_class_set,
)
from choired.fields import class_number

from test_curve import brute_ap
from test_fields import scan_forms

TARGET = 0.1797598


@pytest.fixture(scope="module")
def census_1e6(e497, s497):
    t0 = time.perf_counter()
    rep = run_census(e497, s497, 10 ** 6)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def census_1e7(e497, s497):
    t0 = time.perf_counter()
    rep = run_census(e497, s497, 10 ** 7)
    return rep, time.perf_counter() - t0


def test_c01_worked_example(acceptance):
    buf = io.StringIO()
    t0 = time.perf_counter()
    code = main(["density", "--curve", "497a1", "--p", "5", "--mode", "ss", "--format", "json"], out=buf)
    elapsed = time.perf_counter() - t0
    doc = json.loads(buf.getvalue())
    e = load_curve("497a1")
    exact = density_choired(e, prime_setting(e, 5), SS).delta_choired_ss
    ok = (
        code == 0
        and exact == Fraction(2485, 13824)
        and doc["density"] == {"exact": "2485/13824", "decimal": "0.1797598"}
        and doc["bd_bound"]["decimal"] == "0.0898799"
        and elapsed < 1.0
    )
    acceptance("C1 worked example 2485/13824", ok, f"runtime {elapsed:.3f}s")
    assert ok


def test_c02_census_convergence(acceptance, census_1e6, census_1e7):
    (r6, t6), (r7, t7) = census_1e6, census_1e7
    e6 = abs(r6.choired_ss_plus / r6.total_fields - TARGET)
    e7 = abs(r7.choired_ss_plus / r7.total_fields - TARGET)
    ok = e6 < 0.02 and e7 < 0.005 and t6 < 10 and t7 < 120
    acceptance("C2 census convergence", ok,
               f"err@1e6 {e6:.5f} ({t6:.1f}s), err@1e7 {e7:.5f} ({t7:.1f}s), 1 core")
    assert ok


def test_c03_residue_class_exactness(acceptance, e497, s497):
    res_odd = residue_class_crosscheck(e497, s497, 10 ** 5)
    even = load_curve("14a1")
    res_even = residue_class_crosscheck(even, prime_setting(even, 5), 10 ** 4)
    sizes_ok = True
    for label, p in [("497a1", 5), ("14a1", 5), ("X1(15)", 7), ("11a1", 7)]:
        c = load_curve(label)
        fac = arith.factor(p * c.conductor)
        phi = arith.euler_phi(p * c.conductor, fac)
        want = phi // 2 ** c.r if c.conductor % 2 == 0 else phi // 2 ** (c.r + 1)
        for part in all_partitions(p, c):
            sizes_ok &= len(residue_class_set(part, p, c.conductor).residue_set) == want
    ok = bool(res_odd) and bool(res_even) and sizes_ok
    acceptance("C3 residue-class exactness", ok,
               f"497a1 {res_odd.checked} fields, 14a1 {res_even.checked} fields, "
               f"mismatches {len(res_odd.mismatches) + len(res_even.mismatches)}")
    assert ok


def test_c04_partition_tiling(acceptance, e497, s497, census_1e6, census_1e7):
    reports = [run_census(e497, s497, 10 ** 5), census_1e6[0], census_1e7[0]]
    sums_ok = all(sum(r.per_partition.values()) == r.coprime_fields for r in reports)
    tile_ok = True
    for label, p in [("497a1", 5), ("14a1", 5)]:
        c = load_curve(label)
        mod = partition_modulus(p, c.conductor)
        sets = [residue_class_set(part, p, c.conductor).residue_set for part in all_partitions(p, c)]
        union = set().union(*sets)
        want = {u for u in range(mod) if math.gcd(u, mod) == 1}
        if c.conductor % 2 == 0:
            want = {u for u in want if u % 8 in (1, 5)}
        tile_ok &= sum(map(len, sets)) == len(union) and union == want and len(sets) == 2 ** (c.r + 1)
    ok = sums_ok and tile_ok
    acceptance("C4 partition tiling", ok, "x in {1e5, 1e6, 1e7}; moduli 2485, 280")
    assert ok


def test_c05_squarefree_in_progressions(acceptance):
    x = 10 ** 7
    worst = 0.0
    for b in (4, 8, 20, 28):
        for a in range(b):
            if math.gcd(a, b) == 1:
                exact = arith.count_squarefree_in_ap(x, a, b)
                worst = max(worst, abs(exact / arith.asymptotic_squarefree_in_ap(x, a, b) - 1))
    ok = worst < 0.01
    acceptance("C5 squarefree counts in progressions", ok, f"max rel err {worst:.2e}")
    assert ok


def test_c06_coprime_discriminants(acceptance, e497, s497, census_1e7):
    rep = census_1e7[0]
    fd = float(density_formulas(e497, s497).frak_d)
    err = abs(rep.coprime_fields / rep.total_fields - fd)
    rel = abs(rep.total_fields / (10 ** 7 / (2 * arith.ZETA2)) - 1)
    ok = err < 0.005 and rel < 0.005
    acceptance("C6 coprime discriminant proportion", ok, f"abs err {err:.2e}, total rel err {rel:.2e}")
    assert ok


def test_c07_ord_vs_ss(acceptance, e497, s497, census_1e7, curves):
    exact_ok = True
    for label, p in [("497a1", 5), ("497a1", 13), ("14a1", 5), ("synth-k1-ss", 5), ("X1(15)", 7)]:
        c = curves[label]
        f = density_formulas(c, prime_setting(c, p))
        exact_ok &= f.delta_choired_ord == 2 * f.delta_choired_ss
    ordinary = density_choired(e497, prime_setting(e497, 13), ORD)
    exact_ok &= ordinary.delta_choired_ord == 2 * ordinary.delta_choired_ss
    rep = census_1e7[0]
    gap = abs(rep.choired_ord_plus - rep.choired_ord_minus)
    ok = exact_ok and gap < 0.005 * rep.coprime_fields
    acceptance("C7 ord = 2 ss, p split/inert balance", ok,
               f"|plus - minus| / coprime = {gap / rep.coprime_fields:.2e}")
    assert ok


def test_c08_point_counts(acceptance, curves):
    checked = 0
    ok = True
    for c in curves.values():
        for p in arith.primes_between(3, 100):
            if c.discriminant % p:
                ok &= ap_from_ainvs(c.ainvs, p) == brute_ap(c.ainvs, p)
                checked += 1
    ok &= ap_from_ainvs(curves["497a1"].ainvs, 5) == 0
    acceptance("C8 point-count oracle", ok, f"{checked} (curve, p) pairs")
    assert ok


def test_c09_class_numbers(acceptance):
    discs = [D for D in range(-3, -10 ** 4, -1) if arith.is_fundamental_discriminant(D)]
    bad = [D for D in discs if class_number(D) != scan_forms(D)]
    examples = (class_number(-3), class_number(-4), class_number(-23), class_number(-47)) == (1, 1, 3, 5)
    ok = not bad and examples
    acceptance("C9 class-number oracle", ok, f"{len(discs)} discriminants, {len(bad)} mismatches")
    assert ok


def test_c10_determinism(acceptance, e497, s497, census_1e6):
    base = census_1e6[0]
    same = True
    for workers, chunk in [(1, 1 << 22), (2, 1 << 18), (4, 300000), (1, 99991)]:
        opts = CensusOptions(workers=workers, chunk_size=chunk)
        same &= run_census(e497, s497, 10 ** 6, opts).to_json() == base.to_json()
    opts = CensusOptions(class_sampling_rate=0.05, seed=11)
    whole = run_census(e497, s497, 10 ** 5, opts)
    cuts = [1, 25000, 50000, 75000, 10 ** 5]
    parts = [tally_range(e497, s497, lo, hi, opts) for lo, hi in zip(cuts, cuts[1:])]
    a, b, c, d = parts
    assoc = (
        merge_reports(merge_reports(merge_reports(a, b), c), d)
        == merge_reports(a, merge_reports(b, merge_reports(c, d)))
        == merge_reports(merge_reports(a, b), merge_reports(c, d))
        == whole
    )
    ok = same and assoc
    acceptance("C10 determinism and merge associativity", ok, "workers 1/2/4, four chunk sizes")
    assert ok


def test_c11_cohen_lenstra(acceptance, e497, s497):
    vals = [cohen_lenstra_cp(p) for p in (5, 7, 11, 13)]
    decreasing = all(x > y for x, y in zip(vals, vals[1:]))
    tol_ok = all(abs(cohen_lenstra_cp(p, 1e-12) - cohen_lenstra_cp(p, 1e-18)) < 1e-10 for p in (5, 7, 11, 13))
    rep = run_census(e497, s497, 10 ** 7, CensusOptions(class_sampling_rate=0.01, seed=0))
    est = rep.cp_star()
    recorded = est is not None and rep.verdicts()["cp_star"] == "observational"
    ok = decreasing and tol_ok and recorded
    detail = "no sample" if est is None else (
        f"c_5* = {est[0]:.4f} [{est[1]:.4f}, {est[2]:.4f}] from {rep.class_sampled} fields; "
        f"c_5 = {vals[0]:.4f} (observational)")
    acceptance("C11 Cohen-Lenstra sanity", ok, detail)
    assert ok
