"""Closed-form side: split partitions, residue-class sets, density formulas, c_p.

All densities are exact ``Fraction`` values; floats appear only in
asymptotic counts and in c_p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import arith
from .curve import ORDINARY, SUPERSINGULAR, CurveModel, HypothesisError, PrimeSetting

SS, ORD = "ss", "ord"

# materialise residue sets only below this modulus
MAX_RESIDUE_MODULUS = 10 ** 7


@dataclass(frozen=True)
class SplitPartition:
    pi_minus: frozenset[int]
    pi_plus: frozenset[int]
    modulus: int
    residue_set: frozenset[int] | None = None

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(self.pi_minus | self.pi_plus))

    def label(self) -> str:
        return " ".join(("-" if q in self.pi_minus else "+") + str(q) for q in self.primes)

    def matches(self, symbols: dict[int, int]) -> bool:
        """Whether a field with these Kronecker symbols lies in this partition."""
        return all(symbols[q] == -1 for q in self.pi_minus) and all(
            symbols[q] == 1 for q in self.pi_plus
        )


def partition_modulus(p: int, N: int) -> int:
    return 4 * p * N if N % 2 == 0 else p * N


def all_partitions(p: int, curve: CurveModel) -> list[SplitPartition]:
    """The 2^(r+1) partitions of {p, q_1, ..., q_r} into inert and split parts."""
    primes = (p, *curve.primes)
    mod = partition_modulus(p, curve.conductor)
    out = []
    for bits in itertools.product((False, True), repeat=len(primes)):
        minus = frozenset(q for q, b in zip(primes, bits) if b)
        out.append(SplitPartition(minus, frozenset(primes) - minus, mod))
    return out


def enumerate_partitions(curve: CurveModel, setting: PrimeSetting, mode: str) -> list[SplitPartition]:
    """Partitions whose inert part is an odd subset of the non-kounter bad primes.

    In ss mode p is split; in ord mode each inert set appears twice, once
    with p split and once with p inert.
    """
    if mode not in (SS, ORD):
        raise ValueError(f"unknown mode {mode!r}")
    if setting.k >= curve.r:
        raise HypothesisError(f"k = {setting.k} >= r = {curve.r}: no valid inert sets")
    p = setting.p
    allowed = [q for q in curve.primes if q not in setting.kounter_set]
    everything = frozenset((p, *curve.primes))
    mod = partition_modulus(p, curve.conductor)
    out = []
    for size in range(1, len(allowed) + 1, 2):
        for minus in itertools.combinations(allowed, size):
            inert_sets = [frozenset(minus)]
            if mode == ORD:
                inert_sets.append(frozenset((*minus, p)))
            for m in inert_sets:
                out.append(SplitPartition(m, everything - m, mod))
    return out


def _crt_combine(res_a: np.ndarray, mod_a: int, res_b: np.ndarray, mod_b: int) -> np.ndarray:
    # x = a (mod_a), x = b (mod_b) for coprime moduli
    ea = mod_b * pow(mod_b, -1, mod_a)
    eb = mod_a * pow(mod_a, -1, mod_b)
    m = mod_a * mod_b
    return ((res_a[:, None] * ea + res_b[None, :] * eb) % m).ravel()


def _component(q: int, inert: bool) -> tuple[np.ndarray, int]:
    """Residues of D mod q (or mod 8 for q = 2) with (D|q) = -1 if inert else +1."""
    if q == 2:
        return np.array([5 if inert else 1], dtype=np.int64), 8
    table = arith.kronecker_table(q)
    return np.flatnonzero(table == (-1 if inert else 1)).astype(np.int64), q


def residue_class_set(partition: SplitPartition, p: int, N: int) -> SplitPartition:
    """Fill in the set of residues of D mod pN (4pN when N is even) selecting the partition."""
    if not arith.is_squarefree(N):
        raise ValueError(f"conductor {N} is not square-free")
    primes = set(partition.pi_minus | partition.pi_plus)
    if primes != {p, *arith.factor(N)}:
        raise ValueError("partition does not cover {p} and the primes of N")
    modulus = partition_modulus(p, N)
    if modulus > MAX_RESIDUE_MODULUS:
        raise ValueError(f"modulus {modulus} too large to materialise")
    res, mod = np.array([0], dtype=np.int64), 1
    for q in sorted(primes):
        comp, m = _component(q, q in partition.pi_minus)
        res, mod = _crt_combine(res, mod, comp, m), mod * m
    assert mod == modulus
    fac = arith.factor(p * N)
    phi = arith.euler_phi(p * N, fac)
    r = len(fac) - 1
    expected = phi // 2 ** r if N % 2 == 0 else phi // 2 ** (r + 1)
    if res.size != expected:
        raise AssertionError(f"residue set has {res.size} classes, expected {expected}")
    return replace(partition, modulus=modulus, residue_set=frozenset(int(v) for v in res))


def coprime_disc_asymptotic(x: float, M: int) -> float:
    """Expected number of imaginary quadratic fields with |D| < x and gcd(D, M) = 1."""
    if not arith.is_squarefree(M):
        raise ValueError(f"M = {M} is not square-free")
    val = 0.5 * x / arith.ZETA2
    for q in arith.factor(M):
        val *= q / (q + 1)
    return val


def frak_d(p: int, curve: CurveModel) -> Fraction:
    """Proportion of imaginary quadratic fields with discriminant coprime to pN."""
    den = p + 1
    for q in curve.primes:
        den *= q + 1
    return Fraction(p * curve.conductor, den)


def cohen_lenstra_cp(p: int, tol: float = 1e-18) -> float:
    """Predicted proportion of imaginary quadratic fields with p | h."""
    prod = 1.0
    term = 1.0
    while True:
        term /= p
        if term < tol:
            break
        prod *= 1 - term
    return 6 / math.pi ** 2 * (1 - prod)


@dataclass(frozen=True)
class DensityFormulas:
    delta_pi: Fraction
    delta_choired_ss: Fraction
    delta_choired_ord: Fraction
    frak_d: Fraction
    cp: float
    bd_bound: Fraction
    k: int
    r: int


def density_formulas(curve: CurveModel, setting: PrimeSetting) -> DensityFormulas:
    """Field-side densities; reduction type and a_p are not checked here."""
    r, k = curve.r, setting.k
    if k >= r:
        raise HypothesisError(f"k = {k} >= r = {r}: no choired fields exist (density 0)")
    d = frak_d(setting.p, curve)
    delta_pi = d / 2 ** (r + 1)
    ss = delta_pi * 2 ** (r - k - 1)
    return DensityFormulas(
        delta_pi=delta_pi,
        delta_choired_ss=ss,
        delta_choired_ord=2 * ss,
        frak_d=d,
        cp=cohen_lenstra_cp(setting.p),
        bd_bound=ss / 2,
        k=k,
        r=r,
    )


def density_choired(curve: CurveModel, setting: PrimeSetting, mode: str) -> DensityFormulas:
    if mode == SS and setting.reduction != SUPERSINGULAR:
        raise HypothesisError(f"mode ss needs supersingular reduction, a_{setting.p} = {setting.a_p}")
    if mode == ORD:
        if setting.reduction != ORDINARY:
            raise HypothesisError(f"mode ord needs ordinary reduction, a_{setting.p} = {setting.a_p}")
        if not setting.ap_ok:
            raise HypothesisError(f"a_{setting.p} = {setting.a_p} is congruent to +-1 mod {setting.p}")
    if mode not in (SS, ORD):
        raise ValueError(f"unknown mode {mode!r}")
    return density_formulas(curve, setting)
