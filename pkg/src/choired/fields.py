"""Per-field classification of imaginary quadratic fields relative to (E, p)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import arith
from .curve import UNKNOWN, CurveError, CurveModel, PrimeSetting

SPLIT, INERT, RAMIFIED = 1, -1, 0


@dataclass(frozen=True)
class FieldClass:
    D: int
    coprime_ok: bool
    symbol_at: dict[int, int]
    N_plus: int
    N_minus: int
    h: int | None = None


@dataclass(frozen=True)
class ChoiredConditions:
    coprime: bool
    odd_inert_count: bool
    no_kounter_inert: bool
    ap_ok: bool
    surjective_ok: bool

    def all(self) -> bool:
        return (
            self.coprime
            and self.odd_inert_count
            and self.no_kounter_inert
            and self.ap_ok
            and self.surjective_ok
        )


@dataclass(frozen=True)
class ChoiredVerdict:
    conditions: ChoiredConditions
    p_split: bool
    overall_ord: bool
    overall_ss: bool
    class_number_ok: bool | None = None
    surjectivity_assumed: bool = False


def _require_fundamental(D: int) -> None:
    if D >= 0 or not arith.is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")


def classify_field(D: int, curve: CurveModel, setting: PrimeSetting) -> FieldClass:
    _require_fundamental(D)
    symbols = {setting.p: arith.kronecker_symbol(D, setting.p)}
    n_plus = n_minus = 1
    for q in curve.primes:
        s = arith.kronecker_symbol(D, q)
        symbols[q] = s
        if s == SPLIT:
            n_plus *= q
        elif s == INERT:
            n_minus *= q
    coprime = math.gcd(D, setting.p * curve.conductor) == 1
    return FieldClass(D, coprime, symbols, n_plus, n_minus)


def choired_verdict(
    fc: FieldClass,
    curve: CurveModel,
    setting: PrimeSetting,
    assume_surjective: bool = False,
) -> ChoiredVerdict:
    if set(fc.symbol_at) != {setting.p, *curve.primes}:
        raise CurveError("field was classified for a different curve or prime")
    if not setting.kounter_set <= set(curve.primes):
        raise CurveError("kounter set is not a set of bad primes of this curve")
    inert = [q for q in curve.primes if fc.symbol_at[q] == INERT]
    surj_known = setting.surjectivity != UNKNOWN
    cond = ChoiredConditions(
        coprime=fc.coprime_ok,
        odd_inert_count=len(inert) % 2 == 1,
        no_kounter_inert=not setting.kounter_set.intersection(inert),
        ap_ok=setting.ap_ok,
        surjective_ok=surj_known or assume_surjective,
    )
    p_split = fc.symbol_at[setting.p] == SPLIT
    overall_ord = cond.all()
    class_ok = None if fc.h is None else fc.h % setting.p != 0
    return ChoiredVerdict(
        conditions=cond,
        p_split=p_split,
        overall_ord=overall_ord,
        overall_ss=overall_ord and p_split,
        class_number_ok=class_ok,
        surjectivity_assumed=not surj_known and assume_surjective,
    )


_TRIANGLES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triangle(parity: int, a_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Cells (a, b) with 0 <= b <= a, b = parity (mod 2), sorted by a, covering a <= a_max."""
    cached = _TRIANGLES.get(parity)
    if cached is None or cached[0][-1] < a_max:
        cap = max(2 * a_max, 64)
        a = np.arange(1, cap + 1, dtype=np.int64)
        counts = (a - parity) // 2 + 1
        aa = np.repeat(a, counts)
        starts = np.cumsum(counts) - counts
        bb = parity + 2 * (np.arange(aa.size, dtype=np.int64) - np.repeat(starts, counts))
        cached = _TRIANGLES[parity] = (aa, bb)
    aa, bb = cached
    stop = np.searchsorted(aa, a_max, side="right")
    return aa[:stop], bb[:stop]


def class_number(D: int) -> int:
    """h(D) by counting reduced forms (a, b, c) of discriminant D < 0.

    Reduced means |b| <= a <= c, with b >= 0 when |b| = a or a = c.
    """
    _require_fundamental(D)
    return _count_reduced_forms(-D)


def _count_reduced_forms(n: int) -> int:
    a, b = _triangle(n % 2, math.isqrt(n // 3))
    hit = np.flatnonzero((b * b + n) % (4 * a) == 0)
    a, b = a[hit], b[hit]
    c = (b * b + n) // (4 * a)
    keep = (c >= a) & (np.gcd(np.gcd(a, b), c) == 1)
    a, b, c = a[keep], b[keep], c[keep]
    # b > 0 with b < a < c also gives the distinct reduced form (a, -b, c)
    twins = (b > 0) & (b < a) & (a < c)
    return int(a.size + twins.sum())


def total_ramification_ok(D: int, p: int) -> bool:
    """p does not divide h(D): sufficient (not necessary) for total ramification."""
    return class_number(D) % p != 0
