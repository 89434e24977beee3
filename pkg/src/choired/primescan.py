"""Sweep good primes p for a fixed (E, K) and report where cotorsion is guaranteed."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from . import arith
from .curve import (
    ORDINARY,
    SERRE_CONJECTURAL,
    SUPERSINGULAR,
    CurveError,
    CurveModel,
    ap_from_ainvs,
    serre_surjectivity_bound,
)
from .fields import class_number

GUARANTEED_SS = "guaranteed_ss"
GUARANTEED_ORD = "guaranteed_ord"
NOT_GUARANTEED = "not_guaranteed"
UNKNOWN = "unknown"

MAX_P = 10 ** 6
MAX_DISC_FOR_H = 10 ** 7

TSV_COLUMNS = ("p", "a_p", "reduction", "split", "bound_ok", "congruence_ok", "ap_ok", "hK_ok", "verdict")


@dataclass(frozen=True)
class PrimeScanRow:
    p: int
    a_p: int
    reduction: str
    p_split_in_K: bool
    above_serre_bound: bool
    q_congruence_clear: bool
    ap_nondegenerate: bool
    h_K_ok: bool | None
    verdict: str
    reason: str = ""


@dataclass(frozen=True)
class FieldHypothesis:
    """Whether N^- relative to K is a product of an odd number of distinct primes."""

    ok: bool
    n_minus: int
    reason: str = ""


def field_hypothesis(curve: CurveModel, K_disc: int) -> FieldHypothesis:
    n_minus = 1
    count = 0
    for q in curve.primes:
        s = arith.kronecker_symbol(K_disc, q)
        if s == 0:
            return FieldHypothesis(False, 0, f"bad prime {q} ramifies in K")
        if s == -1:
            n_minus *= q
            count += 1
    if count % 2 == 0:
        return FieldHypothesis(False, n_minus, f"N^- = {n_minus} has an even number of prime factors")
    return FieldHypothesis(True, n_minus)


def scan_primes(
    curve: CurveModel,
    K_disc: int,
    p_lo: int,
    p_hi: int,
    conjectural_serre: bool = False,
    h_K: int | None = None,
) -> list[PrimeScanRow]:
    if not curve.non_cm:
        raise CurveError(f"{curve.label} is not attested non-CM; CM curves are excluded")
    if K_disc >= 0 or not arith.is_fundamental_discriminant(K_disc):
        raise CurveError(f"{K_disc} is not a negative fundamental discriminant")
    if not 3 < p_lo <= p_hi <= MAX_P:
        raise CurveError(f"need 3 < p_lo <= p_hi <= {MAX_P}, got [{p_lo}, {p_hi}]")
    if h_K is None:
        if -K_disc > MAX_DISC_FOR_H:
            raise CurveError(f"|K_disc| > {MAX_DISC_FOR_H}: pass h_K explicitly")
        h_K = class_number(K_disc)
    hyp = field_hypothesis(curve, K_disc)
    kraus_or_coj = serre_surjectivity_bound(curve.conductor)
    rows = []
    for p in arith.primes_between(p_lo, p_hi):
        if curve.discriminant % p == 0:
            continue
        a_p = ap_from_ainvs(curve.ainvs, p)
        ss = a_p % p == 0
        split = arith.kronecker_symbol(K_disc, p)
        if conjectural_serre:
            bound = max(hyp.n_minus + 1, SERRE_CONJECTURAL, h_K if ss else 0)
        else:
            bound = kraus_or_coj
        above = p > bound
        congruence = all(q % p not in (1, p - 1) for q in curve.primes)
        if ss:
            nondeg = a_p == 0
            hk_ok = h_K % p != 0
        else:
            nondeg = a_p % p not in (0, 1, p - 1)
            hk_ok = None
        verdict, reason = _verdict(hyp, ss, split, above, congruence, nondeg, hk_ok)
        rows.append(PrimeScanRow(
            p=p,
            a_p=a_p,
            reduction=SUPERSINGULAR if ss else ORDINARY,
            p_split_in_K=split == 1,
            above_serre_bound=above,
            q_congruence_clear=congruence,
            ap_nondegenerate=nondeg,
            h_K_ok=hk_ok,
            verdict=verdict,
            reason=reason,
        ))
    return rows


def _verdict(hyp, ss, split, above, congruence, nondeg, hk_ok) -> tuple[str, str]:
    if not hyp.ok:
        return NOT_GUARANTEED, hyp.reason
    if split == 0:
        return NOT_GUARANTEED, "p ramifies in K"
    if ss:
        if split != 1:
            return NOT_GUARANTEED, "p inert in K"
        if not hk_ok:
            return NOT_GUARANTEED, "p divides h_K"
    elif not nondeg:
        return NOT_GUARANTEED, "a_p = 0 or +-1 mod p"
    if not above:
        return UNKNOWN, "p below the surjectivity bound"
    if not congruence:
        return UNKNOWN, "a bad prime is +-1 mod p"
    return (GUARANTEED_SS if ss else GUARANTEED_ORD), ""


def _flag(v: bool | None) -> str:
    return "" if v is None else str(int(v))


def rows_to_tsv(rows: list[PrimeScanRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(TSV_COLUMNS)
    for row in rows:
        w.writerow([
            row.p,
            row.a_p,
            row.reduction,
            _flag(row.p_split_in_K),
            _flag(row.above_serre_bound),
            _flag(row.q_congruence_clear),
            _flag(row.ap_nondegenerate),
            _flag(row.h_K_ok),
            row.verdict,
        ])
    return buf.getvalue()
