import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from choired import arith
from choired.curve import CurveModel, HypothesisError, PrimeSetting, load_curve, prime_setting
from choired.density import (
    ORD,
    SS,
    SplitPartition,
    all_partitions,
    cohen_lenstra_cp,
    coprime_disc_asymptotic,
    density_choired,
    density_formulas,
    enumerate_partitions,
    frak_d,
    partition_modulus,
    residue_class_set,
)

# 6/pi^2 (1 - prod_j (1 - 5^-j)), evaluated with mpmath.qp at 40 digits
C5 = 0.14570018881545913


def units(m):
    return {u for u in range(m) if math.gcd(u, m) == 1}


def partitions_of(p, N):
    primes = (p, *sympy.factorint(N))
    mod = partition_modulus(p, N)
    for bits in itertools.product((False, True), repeat=len(primes)):
        minus = frozenset(q for q, b in zip(primes, bits) if b)
        yield SplitPartition(minus, frozenset(primes) - minus, mod)


def test_worked_example(e497, s497):
    f = density_choired(e497, s497, SS)
    assert f.delta_choired_ss == Fraction(2485, 13824)
    assert f"{float(f.delta_choired_ss):.7f}" == "0.1797598"
    assert f"{float(f.bd_bound):.7f}" == "0.0898799"
    assert f.frak_d == Fraction(2485, 3456)
    assert f.delta_pi == Fraction(2485, 27648)
    assert (f.k, f.r) == (0, 2)


def test_frak_d_no_bad_primes():
    c = CurveModel("toy", (0, 0, 0, 0, 1), 1, -432, (), True)
    assert frak_d(7, c) == Fraction(7, 8)


def test_ord_is_twice_ss(curves):
    for label, p in [("497a1", 5), ("14a1", 5), ("X1(15)", 7), ("synth-k1-ss", 5), ("497a1", 13)]:
        c = curves[label]
        f = density_formulas(c, prime_setting(c, p))
        assert f.delta_choired_ord == 2 * f.delta_choired_ss
        assert f.bd_bound * 2 == f.delta_choired_ss


def test_mode_mismatch(e497, s497):
    with pytest.raises(HypothesisError):
        density_choired(e497, s497, ORD)
    with pytest.raises(HypothesisError):
        density_choired(e497, prime_setting(e497, 13), SS)
    with pytest.raises(ValueError):
        density_choired(e497, s497, "both")


def test_k_at_least_r(curves):
    c = curves["11a1"]
    s = prime_setting(c, 5)
    with pytest.raises(HypothesisError):
        density_formulas(c, s)
    with pytest.raises(HypothesisError):
        enumerate_partitions(c, s, SS)


def test_enumerate_partitions_497(e497, s497):
    parts = enumerate_partitions(e497, s497, SS)
    assert sorted(sorted(p.pi_minus) for p in parts) == [[7], [71]]
    assert all(5 in p.pi_plus for p in parts)
    ord_parts = enumerate_partitions(e497, s497, ORD)
    assert len(ord_parts) == 4
    assert sum(5 in p.pi_minus for p in ord_parts) == 2


@pytest.mark.parametrize("label,p", [("497a1", 5), ("14a1", 5), ("X1(15)", 7), ("synth-k1-ss", 5),
                                     ("synth-k1-even", 5), ("11a1", 7)])
def test_partition_count_and_density_sum(curves, label, p):
    c = curves[label]
    s = prime_setting(c, p)
    ss = enumerate_partitions(c, s, SS)
    assert len(ss) == 2 ** (c.r - s.k - 1)
    assert len(enumerate_partitions(c, s, ORD)) == 2 ** (c.r - s.k)
    for part in ss:
        assert len(part.pi_minus) % 2 == 1
        assert not part.pi_minus & s.kounter_set
    f = density_formulas(c, s)
    assert len(ss) * f.delta_pi == f.delta_choired_ss
    assert len(all_partitions(p, c)) * f.delta_pi == f.frak_d


def test_single_prime_residues():
    part = SplitPartition(frozenset({5}), frozenset(), 5)
    assert residue_class_set(part, 5, 1).residue_set == {2, 3}
    part = SplitPartition(frozenset(), frozenset({5}), 5)
    assert residue_class_set(part, 5, 1).residue_set == {1, 4}


def test_residue_set_sizes(e497):
    for part in all_partitions(5, e497):
        rs = residue_class_set(part, 5, 497)
        assert rs.modulus == 2485
        assert len(rs.residue_set) == 210 == arith.euler_phi(2485, {5: 1, 7: 1, 71: 1}) // 8
    c = load_curve("14a1")
    for part in all_partitions(5, c):
        rs = residue_class_set(part, 5, 14)
        assert rs.modulus == 280
        assert len(rs.residue_set) == arith.euler_phi(70, {2: 1, 5: 1, 7: 1}) // 4


def test_residue_set_rejects(e497):
    part = all_partitions(5, e497)[0]
    with pytest.raises(ValueError):
        residue_class_set(part, 5, 7 * 71 * 4)
    with pytest.raises(ValueError):
        residue_class_set(part, 5, 7)
    c = load_curve("synth-k1-ss")
    with pytest.raises(ValueError):
        residue_class_set(all_partitions(5, c)[0], 5, c.conductor)


def check_tiling(p, N):
    mod = partition_modulus(p, N)
    sets = [residue_class_set(part, p, N).residue_set for part in partitions_of(p, N)]
    assert sum(len(s) for s in sets) == len(set().union(*sets))
    want = units(mod)
    if N % 2 == 0:
        want = {u for u in want if u % 8 in (1, 5)}
    assert set().union(*sets) == want


@pytest.mark.parametrize("p,N", [(5, 497), (5, 14), (7, 15), (7, 11), (13, 497)])
def test_tiling(p, N):
    check_tiling(p, N)


squarefree_N = st.integers(1, 400).filter(arith.is_squarefree)


@settings(max_examples=40, deadline=None)
@given(squarefree_N, st.sampled_from([5, 7, 11, 13, 17]))
def test_tiling_property(N, p):
    assume(N % p and partition_modulus(p, N) <= 40000)
    check_tiling(p, N)


@settings(max_examples=200, deadline=None)
@given(squarefree_N, st.sampled_from([5, 7, 11]), st.integers(3, 10 ** 6))
def test_membership_matches_symbols(N, p, n):
    D = -n
    assume(N % p and arith.is_fundamental_discriminant(D) and math.gcd(D, p * N) == 1)
    for part in partitions_of(p, N):
        symbols = {q: arith.kronecker_symbol(D, q) for q in part.primes}
        rs = residue_class_set(part, p, N)
        assert (D % rs.modulus in rs.residue_set) == part.matches(symbols)


def test_coprime_disc_asymptotic():
    x = 10 ** 6
    assert coprime_disc_asymptotic(x, 1) == pytest.approx(x / (2 * arith.ZETA2))
    assert coprime_disc_asymptotic(x, 2485) == pytest.approx(
        x / (2 * arith.ZETA2) * float(Fraction(2485, 3456)))
    with pytest.raises(ValueError):
        coprime_disc_asymptotic(x, 12)


def test_cohen_lenstra():
    assert cohen_lenstra_cp(5) == pytest.approx(C5, abs=1e-15)
    vals = [cohen_lenstra_cp(p) for p in (5, 7, 11, 13)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    for p in (5, 7, 11, 13):
        assert abs(cohen_lenstra_cp(p, 1e-12) - cohen_lenstra_cp(p, 1e-18)) < 1e-10
