"""Exhaustive census of imaginary quadratic fields with |D| < x.

Every field is classified by its Kronecker symbols at p and the bad primes
of E; the tallies are plain integers, so chunks computed in any order or
on any number of workers merge to the same report.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing as mp
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.stats import binomtest

from . import __version__, arith
from .curve import UNKNOWN, CurveModel, HypothesisError, PrimeSetting
from .density import DensityFormulas, all_partitions, density_formulas, residue_class_set
from .fields import _count_reduced_forms

SCHEMA = "choired.census/1"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerance on densities and relative tolerance on the field total, by x."""

    # (x_min, density abs tol, total_fields rel tol), descending x_min
    schedule: tuple[tuple[int, float, float], ...] = (
        (10 ** 7, 0.005, 0.005),
        (10 ** 6, 0.02, 0.005),
        (0, 0.05, 0.05),
    )
    regime_floor: int = 10 ** 5

    def for_x(self, x: int) -> tuple[float, float]:
        for x_min, tol, rel in self.schedule:
            if x >= x_min:
                return tol, rel
        return self.schedule[-1][1], self.schedule[-1][2]

    @classmethod
    def fixed(cls, tol: float, rel: float = 0.005) -> "Tolerances":
        return cls(schedule=((0, tol, rel),))


@dataclass(frozen=True)
class CensusOptions:
    class_sampling_rate: float = 0.0
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    assume_surjective: bool = True
    chunk_size: int = 1 << 22
    workers: int = 1

    def config(self) -> dict:
        """Options that determine the report; chunking and workers do not."""
        return {
            "class_sampling_rate": self.class_sampling_rate,
            "seed": self.seed,
            "tolerances": [list(t) for t in self.tolerances.schedule],
            "regime_floor": self.tolerances.regime_floor,
            "assume_surjective": self.assume_surjective,
        }


def fundamental_discriminants_between(lo: int, hi: int) -> np.ndarray:
    """Negative fundamental discriminants with lo <= |D| < hi, ascending in |D|."""
    lo = max(lo, 1)
    parts = []
    if hi > lo:
        m = arith.sieve_squarefree(lo, hi).squarefree()
        parts.append(m[m % 4 == 3])
    lo4, hi4 = (lo + 3) // 4, (hi + 3) // 4
    if hi4 > lo4:
        n = arith.sieve_squarefree(lo4, hi4).squarefree()
        parts.append(4 * n[(n % 4 == 1) | (n % 4 == 2)])
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return -np.sort(np.concatenate(parts))


def enumerate_fundamental_discriminants(x: int, chunk_size: int = 1 << 22):
    """Yield every fundamental D < 0 with |D| < x, ascending in |D|."""
    if x < 3:
        raise ValueError("x must be at least 3")
    for lo in range(1, x, chunk_size):
        for D in fundamental_discriminants_between(lo, min(x, lo + chunk_size)):
            D = int(D)
            yield arith.FundamentalDiscriminant(D, D if D % 4 == 1 else D // 4)


def _sample_mask(abs_d: np.ndarray, seed: int, rate: float) -> np.ndarray:
    # splitmix64 of (seed, |D|): membership depends on D alone, not on chunking
    if rate <= 0:
        return np.zeros(abs_d.shape, dtype=bool)
    z = abs_d.astype(np.uint64) + np.uint64((seed * 0x9E3779B97F4A7C15) & _MASK64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) / float(1 << 53)
    return u < rate


def partition_index_labels(curve: CurveModel, p: int) -> list[str]:
    """Partition labels indexed by bitmask: bit i set iff the i-th prime of (p, q_1, ..., q_r) is inert."""
    primes = (p, *curve.primes)
    labels = [""] * (1 << len(primes))
    for part in all_partitions(p, curve):
        idx = sum(1 << i for i, q in enumerate(primes) if q in part.pi_minus)
        labels[idx] = part.label()
    return labels


def _choired_tables(curve: CurveModel, setting: PrimeSetting, setting_ok: bool):
    """Per-partition-index flags for (choired with p split, choired with p inert)."""
    r = curve.r
    size = 1 << (r + 1)
    plus = np.zeros(size, dtype=bool)
    minus = np.zeros(size, dtype=bool)
    if not setting_ok:
        return plus, minus
    kounter_bits = sum(1 << (i + 1) for i, q in enumerate(curve.primes) if q in setting.kounter_set)
    for idx in range(size):
        bad_inert = idx >> 1
        if bin(bad_inert).count("1") % 2 == 1 and not idx & kounter_bits:
            if idx & 1:
                minus[idx] = True
            else:
                plus[idx] = True
    return plus, minus


@dataclass(frozen=True)
class ClassifiedRange:
    D: np.ndarray
    coprime: np.ndarray
    partition: np.ndarray  # bitmask index, meaningful where coprime
    choired_plus: np.ndarray
    choired_minus: np.ndarray


def _setting_ok(setting: PrimeSetting, options: CensusOptions) -> bool:
    return setting.ap_ok and (setting.surjectivity != UNKNOWN or options.assume_surjective)


def classify_range(
    curve: CurveModel, setting: PrimeSetting, lo: int, hi: int, options: CensusOptions = CensusOptions()
) -> ClassifiedRange:
    D = fundamental_discriminants_between(lo, hi)
    coprime = np.ones(D.shape, dtype=bool)
    idx = np.zeros(D.shape, dtype=np.int64)
    for i, q in enumerate((setting.p, *curve.primes)):
        s = arith.kronecker_vec(D, q)
        coprime &= s != 0
        idx |= (s == -1).astype(np.int64) << i
    plus_t, minus_t = _choired_tables(curve, setting, _setting_ok(setting, options))
    return ClassifiedRange(D, coprime, idx, coprime & plus_t[idx], coprime & minus_t[idx])


@dataclass(frozen=True)
class Row:
    name: str
    count: int | None
    empirical: float | None
    theoretical: float | None
    abs_error: float | None
    tolerance: float | None
    verdict: str  # pass | fail | observational


@dataclass(frozen=True)
class CensusReport:
    curve: CurveModel
    setting: PrimeSetting
    options: CensusOptions
    ranges: tuple[tuple[int, int], ...] = ()
    total_fields: int = 0
    coprime_fields: int = 0
    per_partition: dict[str, int] = field(default_factory=dict)
    choired_ss_plus: int = 0
    choired_ord_plus: int = 0
    choired_ord_minus: int = 0
    class_sampled: int = 0
    class_p_divides: int = 0

    @property
    def x(self) -> int:
        return max((hi for _, hi in self.ranges), default=0)

    @property
    def span(self) -> int:
        return sum(hi - lo for lo, hi in self.ranges)

    @property
    def theoretical(self) -> DensityFormulas:
        return density_formulas(self.curve, self.setting)

    def tallies(self) -> dict:
        return {
            "total_fields": self.total_fields,
            "coprime_fields": self.coprime_fields,
            "per_partition": dict(self.per_partition),
            "choired_ss_plus": self.choired_ss_plus,
            "choired_ord_plus": self.choired_ord_plus,
            "choired_ord_minus": self.choired_ord_minus,
            "class_sampled": self.class_sampled,
            "class_p_divides": self.class_p_divides,
        }

    def cp_star(self) -> tuple[float, float, float] | None:
        """Estimate of c_p* with a 95% Wilson interval, from the class-number sample."""
        if not self.class_sampled:
            return None
        ci = binomtest(self.class_p_divides, self.class_sampled).proportion_ci(
            confidence_level=0.95, method="wilson"
        )
        return self.class_p_divides / self.class_sampled, float(ci.low), float(ci.high)

    def rows(self) -> list[Row]:
        tol, rel = self.options.tolerances.for_x(self.x)
        th = self.theoretical
        setting_ok = _setting_ok(self.setting, self.options)
        total = self.total_fields
        out = []

        def density_row(name, count, target):
            if not total:
                out.append(Row(name, count, None, float(target), None, tol, "fail"))
                return
            emp = count / total
            err = abs(emp - float(target))
            out.append(Row(name, count, emp, float(target), err, tol, "pass" if err < tol else "fail"))

        expected_total = self.span / (2 * arith.ZETA2)
        if expected_total:
            ratio = total / expected_total
            err = abs(ratio - 1)
            out.append(Row("total_fields_vs_asymptotic", total, ratio, 1.0, err, rel,
                           "pass" if err < rel else "fail"))
        density_row("coprime_fields", self.coprime_fields, th.frak_d)
        ss = th.delta_choired_ss if setting_ok else Fraction(0)
        density_row("choired_ss_plus", self.choired_ss_plus, ss)
        density_row("choired_ord_plus", self.choired_ord_plus, ss)
        density_row("choired_ord_minus", self.choired_ord_minus, ss)
        density_row("choired_ord", self.choired_ord_plus + self.choired_ord_minus, 2 * ss)
        if self.coprime_fields:
            bal = abs(self.choired_ord_plus - self.choired_ord_minus) / self.coprime_fields
            out.append(Row("pm_balance", self.choired_ord_plus - self.choired_ord_minus, bal, 0.0, bal,
                           tol, "pass" if bal < tol else "fail"))
        for label, count in self.per_partition.items():
            density_row(f"partition[{label}]", count, th.delta_pi)
        est = self.cp_star()
        if est is not None:
            out.append(Row("cp_star", self.class_p_divides, est[0], th.cp, abs(est[0] - th.cp), None,
                           "observational"))
        return out

    def verdicts(self) -> dict[str, str]:
        return {row.name: row.verdict for row in self.rows()}

    @property
    def passed(self) -> bool:
        return all(v != "fail" for v in self.verdicts().values())

    def warnings(self) -> list[str]:
        out = [
            "tolerances are engineering choices: the densities carry no proven error term",
        ]
        if self.setting.surjectivity == UNKNOWN:
            if self.options.assume_surjective:
                out.append(f"surjectivity of the mod-{self.setting.p} representation is unknown; "
                           "counted in assume-surjective mode")
            else:
                out.append(f"surjectivity of the mod-{self.setting.p} representation is unknown; "
                           "choired counts are zero")
        if not self.setting.ap_ok:
            out.append(f"a_{self.setting.p} = {self.setting.a_p} is +-1 mod {self.setting.p}; "
                       "no field satisfies the choired conditions")
        if self.x < self.options.tolerances.regime_floor:
            out.append(f"x = {self.x} is below the asymptotic regime "
                       f"(x < {self.options.tolerances.regime_floor})")
        if self.ranges and (self.ranges[0][0] > 1 or len(self.ranges) > 1):
            out.append("report covers a partial discriminant range")
        return out

    def to_dict(self) -> dict:
        th = self.theoretical
        est = self.cp_star()
        return {
            "schema": SCHEMA,
            "version": __version__,
            "config": {
                "curve": self.curve.to_record(),
                "p": self.setting.p,
                "x": self.x,
                **self.options.config(),
            },
            "setting": {
                "a_p": self.setting.a_p,
                "reduction": self.setting.reduction,
                "kounter_set": sorted(self.setting.kounter_set),
                "k": self.setting.k,
                "r": self.curve.r,
                "surjectivity": self.setting.surjectivity,
            },
            "ranges": [list(rg) for rg in self.ranges],
            "tallies": self.tallies(),
            "theoretical": {
                name: {"exact": str(val), "decimal": float(val)}
                for name, val in (
                    ("delta_pi", th.delta_pi),
                    ("delta_choired_ss", th.delta_choired_ss),
                    ("delta_choired_ord", th.delta_choired_ord),
                    ("frak_d", th.frak_d),
                    ("bd_bound", th.bd_bound),
                )
            }
            | {"cp": th.cp},
            "class_sample": None
            if est is None
            else {
                "sampled": self.class_sampled,
                "p_divides_h": self.class_p_divides,
                "cp_star": est[0],
                "ci95": [est[1], est[2]],
                "cp": th.cp,
            },
            "rows": [asdict(row) for row in self.rows()],
            "verdicts": self.verdicts(),
            "passed": self.passed,
            "warnings": self.warnings(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["name", "count", "empirical", "theoretical", "abs_error", "verdict"])
        for row in self.rows():
            w.writerow([
                row.name,
                "" if row.count is None else row.count,
                _fmt(row.empirical),
                _fmt(row.theoretical),
                _fmt(row.abs_error),
                row.verdict,
            ])
        return buf.getvalue()


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.7f}"


def empty_report(curve: CurveModel, setting: PrimeSetting, options: CensusOptions) -> CensusReport:
    labels = partition_index_labels(curve, setting.p)
    return CensusReport(curve, setting, options, per_partition={lab: 0 for lab in labels})


def tally_range(
    curve: CurveModel, setting: PrimeSetting, lo: int, hi: int, options: CensusOptions
) -> CensusReport:
    """Census report for lo <= |D| < hi."""
    cr = classify_range(curve, setting, lo, hi, options)
    labels = partition_index_labels(curve, setting.p)
    per = np.bincount(cr.partition[cr.coprime], minlength=len(labels))
    sampled = cr.D[cr.choired_plus & _sample_mask(-cr.D, options.seed, options.class_sampling_rate)]
    divides = sum(1 for D in sampled if _count_reduced_forms(-int(D)) % setting.p == 0)
    plus = int(cr.choired_plus.sum())
    return CensusReport(
        curve,
        setting,
        options,
        ranges=((lo, hi),) if hi > lo else (),
        total_fields=int(cr.D.size),
        coprime_fields=int(cr.coprime.sum()),
        per_partition={lab: int(c) for lab, c in zip(labels, per)},
        choired_ss_plus=plus,
        choired_ord_plus=plus,
        choired_ord_minus=int(cr.choired_minus.sum()),
        class_sampled=int(sampled.size),
        class_p_divides=divides,
    )


def _coalesce(ranges) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    for lo, hi in sorted(ranges):
        if out and lo < out[-1][1]:
            raise ValueError(f"overlapping discriminant ranges {out[-1]} and {(lo, hi)}")
        if out and lo == out[-1][1]:
            out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def merge_reports(a: CensusReport, b: CensusReport) -> CensusReport:
    if a.curve != b.curve or a.setting != b.setting or a.options.config() != b.options.config():
        raise ValueError("cannot merge census reports with different configurations")
    per = {lab: a.per_partition.get(lab, 0) + b.per_partition.get(lab, 0)
           for lab in (a.per_partition | b.per_partition)}
    return replace(
        a,
        ranges=_coalesce(a.ranges + b.ranges),
        total_fields=a.total_fields + b.total_fields,
        coprime_fields=a.coprime_fields + b.coprime_fields,
        per_partition=per,
        choired_ss_plus=a.choired_ss_plus + b.choired_ss_plus,
        choired_ord_plus=a.choired_ord_plus + b.choired_ord_plus,
        choired_ord_minus=a.choired_ord_minus + b.choired_ord_minus,
        class_sampled=a.class_sampled + b.class_sampled,
        class_p_divides=a.class_p_divides + b.class_p_divides,
    )


def _tally_job(args) -> CensusReport:
    return tally_range(*args)


def run_census(
    curve: CurveModel, setting: PrimeSetting, x: int, options: CensusOptions = CensusOptions()
) -> CensusReport:
    """Classify every imaginary quadratic field with |D| < x and tally the results."""
    if setting.k >= curve.r:
        raise HypothesisError(f"k = {setting.k} >= r = {curve.r}: no choired fields exist (density 0)")
    if x < 3:
        raise ValueError("x must be at least 3")
    jobs = [(curve, setting, lo, min(x, lo + options.chunk_size), options)
            for lo in range(1, x, options.chunk_size)]
    if options.workers > 1 and len(jobs) > 1:
        with mp.get_context("fork").Pool(options.workers) as pool:
            parts = pool.map(_tally_job, jobs, chunksize=1)
    else:
        parts = [_tally_job(job) for job in jobs]
    return reduce(merge_reports, parts, empty_report(curve, setting, options))


@dataclass(frozen=True)
class CrosscheckResult:
    ok: bool
    checked: int
    mismatches: tuple[tuple[int, str], ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def residue_class_crosscheck(
    curve: CurveModel, setting: PrimeSetting, x: int, partitions=None, max_witnesses: int = 20
) -> CrosscheckResult:
    """Compare residue-set membership of D with its direct Kronecker classification.

    For every fundamental D coprime to pN with |D| < x and every partition,
    membership of D in the partition's residue set must agree with the
    partition read off from the symbols (D|l).
    """
    p, N = setting.p, curve.conductor
    if partitions is None:
        partitions = [residue_class_set(part, p, N) for part in all_partitions(p, curve)]
    primes = (p, *curve.primes)
    D = fundamental_discriminants_between(1, x)
    D = D[np.gcd(D, p * N) == 1]
    symbols = [{q: arith.kronecker_symbol(Dv, q) for q in primes} for Dv in D.tolist()]
    mismatches = []
    bad = 0
    for part in partitions:
        members = np.isin(D % part.modulus, np.fromiter(part.residue_set, dtype=np.int64))
        for Dv, sym, inside in zip(D.tolist(), symbols, members.tolist()):
            if inside != part.matches(sym):
                bad += 1
                if len(mismatches) < max_witnesses:
                    mismatches.append((Dv, part.label()))
    return CrosscheckResult(bad == 0, int(D.size), tuple(mismatches))
