"""Elliptic curve input: validation, a_p, reduction type, kounter primes, Serre bounds."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import arith

SERRE_CONJECTURAL = 37

ATTESTED = "attested"
IMPLIED_BY_BOUND = "implied_by_bound"
UNKNOWN = "unknown"

SUPERSINGULAR = "supersingular"
ORDINARY = "ordinary"


class CurveError(ValueError):
    """Curve record or prime is outside the supported setting."""


class HypothesisError(ValueError):
    """A standing hypothesis fails, e.g. p <= 3 or k >= r."""


def b_invariants(ainvs):
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def discriminant(ainvs) -> int:
    b2, b4, b6, b8 = b_invariants(ainvs)
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def c4_invariant(ainvs) -> int:
    b2, b4, _, _ = b_invariants(ainvs)
    return b2 * b2 - 24 * b4


@dataclass(frozen=True)
class CurveModel:
    label: str
    ainvs: tuple[int, int, int, int, int]
    conductor: int
    discriminant: int
    bad_primes: tuple[tuple[int, int], ...]  # (q, ord_q(disc)), ascending q
    non_cm: bool
    attested_surjective_primes: tuple[int, ...] | None = None

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.bad_primes)

    @property
    def r(self) -> int:
        return len(self.bad_primes)

    def disc_valuation(self, q: int) -> int:
        for q0, v in self.bad_primes:
            if q0 == q:
                return v
        raise CurveError(f"{q} is not a bad prime of {self.label}")

    def to_record(self) -> dict:
        rec = {
            "label": self.label,
            "ainvs": list(self.ainvs),
            "conductor": self.conductor,
            "non_cm": self.non_cm,
        }
        if self.attested_surjective_primes is not None:
            rec["surjective_primes"] = list(self.attested_surjective_primes)
        return rec


def validate_curve(raw: dict) -> CurveModel:
    """Check a raw curve record and build the validated model.

    The model is trusted to be minimal; only consistency with a
    square-free conductor of multiplicative primes is verified.
    """
    try:
        label = str(raw["label"])
        ainvs = tuple(int(a) for a in raw["ainvs"])
        N = int(raw["conductor"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CurveError(f"malformed curve record: {exc}") from exc
    if len(ainvs) != 5:
        raise CurveError(f"{label}: expected 5 a-invariants, got {len(ainvs)}")
    if N <= 0:
        raise CurveError(f"{label}: conductor must be positive")
    disc = discriminant(ainvs)
    if disc == 0:
        raise CurveError(f"{label}: singular model (discriminant 0)")
    fac = arith.factor(N)
    if any(e > 1 for e in fac.values()):
        raise CurveError(f"{label}: conductor {N} is not square-free")
    c4 = c4_invariant(ainvs)
    bad = []
    rest = abs(disc)
    for q in sorted(fac):
        if disc % q:
            raise CurveError(f"{label}: bad prime {q} does not divide the discriminant")
        if c4 % q == 0:
            raise CurveError(f"{label}: additive reduction at {q} (q | c4)")
        v = arith.valuation(disc, q)
        rest //= q ** v
        bad.append((q, v))
    if rest != 1:
        raise CurveError(f"{label}: discriminant has prime factors outside the conductor")
    surj = raw.get("surjective_primes")
    return CurveModel(
        label=label,
        ainvs=ainvs,  # type: ignore[arg-type]
        conductor=N,
        discriminant=disc,
        bad_primes=tuple(bad),
        non_cm=bool(raw.get("non_cm", False)),
        attested_surjective_primes=None if surj is None else tuple(int(p) for p in surj),
    )


def bundled_curves_path() -> Path:
    return Path(str(resources.files("choired") / "data" / "curves.jsonl"))


def read_curve_records(path=None) -> list[dict]:
    path = bundled_curves_path() if path is None else Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CurveError(f"{path}:{lineno}: {exc}") from exc
    return records


def load_curve(label: str, path=None) -> CurveModel:
    for rec in read_curve_records(path):
        if rec.get("label") == label:
            return validate_curve(rec)
    raise CurveError(f"no curve labelled {label!r}")


def ap_from_ainvs(ainvs, p: int) -> int:
    """a_p = p + 1 - #E(F_p) by a character sum over x in F_p.

    Completing the square turns the model into (2y + a1 x + a3)^2 = f(x)
    with f = 4x^3 + b2 x^2 + 2 b4 x + b6, so each x contributes
    1 + (f(x)|p) affine points.
    """
    if p < 3:
        raise CurveError("p must be an odd prime")
    b2, b4, b6, _ = b_invariants(ainvs)
    x = np.arange(p, dtype=np.int64)
    f = (4 * x + b2 % p) % p
    f = (f * x + (2 * b4) % p) % p
    f = (f * x + b6 % p) % p
    chi = arith.kronecker_table(p)
    return -int(chi[f].sum(dtype=np.int64))


def ap_point_count(curve: CurveModel, p: int) -> int:
    if p <= 3 or not arith.is_prime(p):
        raise CurveError(f"p = {p} must be a prime > 3")
    if curve.discriminant % p == 0:
        raise CurveError(f"{curve.label} has bad reduction at {p}")
    return ap_from_ainvs(curve.ainvs, p)


def mod_p_unramified_at(curve: CurveModel, q: int, p: int) -> bool:
    """Whether the mod-p representation is unramified at the multiplicative prime q.

    Tate-curve criterion: unramified iff p | ord_q(disc).
    """
    return curve.disc_valuation(q) % p == 0


def kounter_primes(curve: CurveModel, p: int) -> tuple[frozenset[int], int]:
    ks = frozenset(
        q for q in curve.primes if q % p in (1, p - 1) and mod_p_unramified_at(curve, q, p)
    )
    return ks, len(ks)


def serre_bounds(N: int) -> tuple[float, float]:
    """(Kraus, Cojocaru) upper bounds for the non-surjective primes of a conductor-N curve."""
    if N <= 2:
        raise CurveError("Serre bounds need N >= 3")
    kraus = 68 * N * math.sqrt(1 + math.log(math.log(N)))
    coj = 4 * math.sqrt(6) / 3 * N
    for q in arith.factor(N):
        coj *= math.sqrt(1 + 1 / q)
    return kraus, coj


def serre_surjectivity_bound(N: int, conjectural: bool = False) -> float:
    if conjectural:
        return float(SERRE_CONJECTURAL)
    return min(serre_bounds(N))


def surjectivity_status(curve: CurveModel, p: int, conjectural: bool = False) -> str:
    if curve.attested_surjective_primes and p in curve.attested_surjective_primes:
        return ATTESTED
    if curve.non_cm and p > serre_surjectivity_bound(curve.conductor, conjectural):
        return IMPLIED_BY_BOUND
    return UNKNOWN


@dataclass(frozen=True)
class PrimeSetting:
    p: int
    a_p: int
    reduction: str
    kounter_set: frozenset[int] = field(default_factory=frozenset)
    k: int = 0
    surjectivity: str = UNKNOWN

    @property
    def ap_ok(self) -> bool:
        return self.a_p % self.p not in (1, self.p - 1)


def prime_setting(curve: CurveModel, p: int, conjectural_serre: bool = False) -> PrimeSetting:
    if p <= 3:
        raise HypothesisError(f"p = {p}: a prime p > 3 is required")
    if not arith.is_prime(p):
        raise CurveError(f"p = {p} is not prime")
    if p > 10 ** 6:
        raise CurveError(f"p = {p} exceeds the supported range p <= 10^6")
    a_p = ap_point_count(curve, p)
    assert a_p * a_p <= 4 * p, "Hasse bound violated"
    ks, k = kounter_primes(curve, p)
    return PrimeSetting(
        p=p,
        a_p=a_p,
        reduction=SUPERSINGULAR if a_p % p == 0 else ORDINARY,
        kounter_set=ks,
        k=k,
        surjectivity=surjectivity_status(curve, p, conjectural_serre),
    )
