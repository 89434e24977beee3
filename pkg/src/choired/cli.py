"""Command-line entry point: check, density, census, primescan, class-number."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .census import CensusOptions, Tolerances, run_census
from .curve import (
    SERRE_CONJECTURAL,
    CurveError,
    HypothesisError,
    load_curve,
    prime_setting,
    serre_bounds,
    serre_surjectivity_bound,
)
from .density import ORD, SS, density_choired
from .fields import class_number, total_ramification_ok
from .primescan import rows_to_tsv, scan_primes

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_TOLERANCE = 0, 2, 3, 4

BD_LABEL = "Bertolini–Darmon-hypothesis comparison"


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    curve_file: str | None = None
    curve: str | None = None
    p: int | None = None
    x: int | None = None
    mode: str = "auto"
    class_sampling_rate: float = 0.0
    seed: int = 0
    tolerance: float | None = None
    threads: int = 1
    chunk_size: int = 1 << 22
    format: str = "text"
    assume_surjective: bool = True
    serre_conjectural: bool = False
    K: int | None = None
    p_lo: int | None = None
    p_hi: int | None = None
    h_K: int | None = None

    def echo(self) -> dict:
        """Resolved configuration; worker count and chunking are reported separately."""
        out = asdict(self)
        del out["threads"], out["chunk_size"]
        return out


def _int_like(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        val = float(text)
        if not val.is_integer():
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
        return int(val)


def _threads_default() -> int:
    env = os.environ.get("CHOIRED_THREADS")
    return int(env) if env else 1


def _dec(v) -> str:
    return f"{float(v):.7f}"


def _exact(v: Fraction) -> dict:
    return {"exact": f"{v.numerator}/{v.denominator}", "decimal": _dec(v)}


def _header(cfg: RunConfig) -> dict:
    return {"version": __version__, "run_config": cfg.echo()}


def _resolve_mode(mode: str, setting) -> str:
    if mode == "auto":
        return SS if setting.a_p == 0 else ORD
    return mode


def _load(cfg: RunConfig):
    if not cfg.curve:
        raise CurveError("--curve is required")
    curve = load_curve(cfg.curve, cfg.curve_file)
    if cfg.p is None:
        return curve, None
    return curve, prime_setting(curve, cfg.p, cfg.serre_conjectural)


def cmd_check(cfg: RunConfig, out) -> int:
    curve, setting = _load(cfg)
    if setting is None:
        raise CurveError("--p is required")
    kraus, coj = serre_bounds(curve.conductor)
    bound = serre_surjectivity_bound(curve.conductor, cfg.serre_conjectural)
    facts = {
        "curve": curve.to_record(),
        "discriminant": curve.discriminant,
        "bad_primes": [{"q": q, "ord_q_disc": v} for q, v in curve.bad_primes],
        "p": setting.p,
        "a_p": setting.a_p,
        "reduction": setting.reduction,
        "ap_ok": setting.ap_ok,
        "kounter_set": sorted(setting.kounter_set),
        "k": setting.k,
        "r": curve.r,
        "surjectivity": setting.surjectivity,
        "serre_bound": {"kraus": kraus, "cojocaru": coj, "used": bound,
                        "conjectural": cfg.serre_conjectural},
    }
    status = EXIT_OK
    note = None
    dens = None
    if setting.k >= curve.r:
        note = f"k = {setting.k} >= r = {curve.r}: no choired fields exist, density 0"
        status = EXIT_HYPOTHESIS
    else:
        mode = _resolve_mode(cfg.mode, setting)
        try:
            dens = density_choired(curve, setting, mode)
        except HypothesisError as exc:
            note = str(exc)
            status = EXIT_HYPOTHESIS
    if cfg.format == "json":
        doc = _header(cfg) | {"schema": "choired.check/1", "facts": facts, "note": note}
        if dens is not None:
            doc["cp"] = dens.cp
            doc["density"] = _exact(dens.delta_choired_ss if mode == SS else dens.delta_choired_ord)
        out.write(json.dumps(doc, indent=2) + "\n")
        return status
    out.write(f"# choired {__version__} check {json.dumps(cfg.echo())}\n")
    out.write(f"curve           {curve.label} {list(curve.ainvs)}  N = {curve.conductor} = "
              + " * ".join(map(str, curve.primes)) + "\n")
    out.write(f"discriminant    {curve.discriminant}  ("
              + ", ".join(f"ord_{q} = {v}" for q, v in curve.bad_primes) + ")\n")
    out.write(f"a_{setting.p}{' ' * (13 - len(str(setting.p)))}{setting.a_p}  ({setting.reduction}"
              f"{'' if setting.ap_ok else ', a_p = +-1 mod p'})\n")
    out.write(f"kounter primes  {sorted(setting.kounter_set)}  k = {setting.k}  r = {curve.r}\n")
    out.write(f"surjectivity    {setting.surjectivity}\n")
    out.write(f"serre bound     Kraus {kraus:.1f}  Cojocaru {coj:.1f}  used {bound:.1f}"
              f"{' (conjectural C_E = %d)' % SERRE_CONJECTURAL if cfg.serre_conjectural else ''}\n")
    if dens is not None:
        val = dens.delta_choired_ss if mode == SS else dens.delta_choired_ord
        out.write(f"c_p             {_dec(dens.cp)}\n")
        out.write(f"density ({mode})    {val.numerator}/{val.denominator} = {_dec(val)}\n")
    if note:
        out.write(f"note            {note}\n")
    return status


def cmd_density(cfg: RunConfig, out) -> int:
    curve, setting = _load(cfg)
    if setting is None:
        raise CurveError("--p is required")
    mode = _resolve_mode(cfg.mode, setting)
    dens = density_choired(curve, setting, mode)
    headline = dens.delta_choired_ss if mode == SS else dens.delta_choired_ord
    items = [
        ("density", headline),
        ("delta_pi", dens.delta_pi),
        ("delta_choired_ss", dens.delta_choired_ss),
        ("delta_choired_ord", dens.delta_choired_ord),
        ("frak_d", dens.frak_d),
        ("bd_bound", dens.bd_bound),
    ]
    caveat = None
    if mode == SS:
        caveat = ("cotorsion with mu = 0 is guaranteed for a proportion of at least "
                  "density * (1 - c_p*), c_p* = share of these fields with p | h_K")
    if cfg.format == "json":
        doc = _header(cfg) | {
            "schema": "choired.density/1",
            "curve": curve.label,
            "p": setting.p,
            "mode": mode,
            "k": dens.k,
            "r": dens.r,
            **{name: _exact(v) for name, v in items},
            "bd_bound_label": BD_LABEL,
            "cp": dens.cp,
            "caveat": caveat,
        }
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    out.write(f"# choired {__version__} density {json.dumps(cfg.echo())}\n")
    out.write(f"curve {curve.label}  p = {setting.p}  a_p = {setting.a_p}  mode = {mode}"
              f"  k = {dens.k}  r = {dens.r}\n")
    for name, v in items:
        suffix = f"  ({BD_LABEL})" if name == "bd_bound" else ""
        out.write(f"{name:<18} {v.numerator}/{v.denominator} = {_dec(v)}{suffix}\n")
    out.write(f"{'c_p':<18} {_dec(dens.cp)}\n")
    if caveat:
        out.write(f"caveat: {caveat}\n")
    return EXIT_OK


def cmd_census(cfg: RunConfig, out, out_prefix: str | None = None) -> int:
    curve, setting = _load(cfg)
    if setting is None or cfg.x is None:
        raise CurveError("--p and --x are required")
    if not 0 <= cfg.class_sampling_rate <= 1:
        raise CurveError("--class-sampling-rate must lie in [0, 1]")
    if cfg.threads < 1 or cfg.chunk_size < 1:
        raise CurveError("--threads and --chunk-size must be positive")
    tol = Tolerances() if cfg.tolerance is None else Tolerances.fixed(cfg.tolerance)
    options = CensusOptions(
        class_sampling_rate=cfg.class_sampling_rate,
        seed=cfg.seed,
        tolerances=tol,
        assume_surjective=cfg.assume_surjective,
        chunk_size=cfg.chunk_size,
        workers=cfg.threads,
    )
    t0 = time.perf_counter()
    report = run_census(curve, setting, cfg.x, options)
    elapsed = time.perf_counter() - t0
    doc = _header(cfg) | report.to_dict() | {
        "runtime": {"threads": cfg.threads, "chunk_size": cfg.chunk_size},
    }
    json_text = json.dumps(doc, indent=2) + "\n"
    tsv_text = report.to_tsv()
    prefix = out_prefix or f"census-{curve.label}-p{setting.p}-x{cfg.x}"
    Path(prefix + ".json").write_text(json_text, encoding="utf-8")
    Path(prefix + ".tsv").write_text(tsv_text, encoding="utf-8")
    out.write(json_text if cfg.format == "json" else tsv_text)
    for w in report.warnings():
        print(f"warning: {w}", file=sys.stderr)
    print(f"census: {elapsed:.2f}s with {cfg.threads} worker(s); wrote {prefix}.json, {prefix}.tsv",
          file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def cmd_primescan(cfg: RunConfig, out) -> int:
    curve, _ = _load(cfg)
    if cfg.K is None or cfg.p_lo is None or cfg.p_hi is None:
        raise CurveError("--K, --p-lo and --p-hi are required")
    rows = scan_primes(curve, cfg.K, cfg.p_lo, cfg.p_hi, cfg.serre_conjectural, cfg.h_K)
    if cfg.format == "json":
        doc = _header(cfg) | {"schema": "choired.primescan/1", "rows": [asdict(r) for r in rows]}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(f"# choired {__version__} primescan {json.dumps(cfg.echo())}\n")
        out.write(rows_to_tsv(rows))
    if rows:
        ss = sum(r.reduction == "supersingular" for r in rows)
        print(f"primescan: {len(rows)} good primes, {ss} supersingular "
              f"({ss / len(rows):.3f}, observational)", file=sys.stderr)
    return EXIT_OK


def cmd_class_number(D: int, p: int | None, out) -> int:
    h = class_number(D)
    out.write(f"h({D}) = {h}\n")
    if p is not None:
        out.write(f"{p} does not divide h: {total_ramification_ok(D, p)} "
                  "(sufficient for total ramification, not necessary)\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="choired", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def curve_args(sp, need_p=True):
        sp.add_argument("--curve-file", help="JSON-lines curve file (default: bundled fixtures)")
        sp.add_argument("--curve", required=True, help="curve label")
        if need_p:
            sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--serre-conjectural", action="store_true",
                        help=f"use the conjectural surjectivity threshold {SERRE_CONJECTURAL}")

    sp = sub.add_parser("check", help="field-independent facts for (E, p)")
    curve_args(sp)
    sp.add_argument("--mode", choices=("ss", "ord", "auto"), default="auto")
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("density", help="closed-form densities")
    curve_args(sp)
    sp.add_argument("--mode", choices=("ss", "ord", "auto"), default="auto")
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("census", help="enumerate and classify fields with |D| < x")
    curve_args(sp)
    sp.add_argument("--x", type=_int_like, required=True)
    sp.add_argument("--mode", choices=("ss", "ord", "auto"), default="auto")
    sp.add_argument("--class-sampling-rate", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=None, help="fixed absolute tolerance for every x")
    sp.add_argument("--threads", type=int, default=None, help="worker processes (env CHOIRED_THREADS)")
    sp.add_argument("--chunk-size", type=_int_like, default=1 << 22)
    sp.add_argument("--out", default=None, help="output prefix for .json and .tsv")
    sp.add_argument("--format", choices=("tsv", "json"), default="tsv")
    sp.add_argument("--assume-surjective", action=argparse.BooleanOptionalAction, default=True)

    sp = sub.add_parser("primescan", help="sweep primes p for fixed (E, K)")
    curve_args(sp, need_p=False)
    sp.add_argument("--K", type=int, required=True, help="fundamental discriminant of K")
    sp.add_argument("--p-lo", type=_int_like, required=True)
    sp.add_argument("--p-hi", type=_int_like, required=True)
    sp.add_argument("--h-K", type=int, default=None, help="class number of K, if |disc| > 10^7")
    sp.add_argument("--format", choices=("tsv", "json"), default="tsv")

    sp = sub.add_parser("class-number", help="h(D) for a negative fundamental discriminant")
    sp.add_argument("D", type=int)
    sp.add_argument("--p", type=int, default=None)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "class-number":
            return cmd_class_number(args.D, args.p, out)
        cfg = RunConfig(
            subcommand=args.subcommand,
            curve_file=args.curve_file,
            curve=args.curve,
            p=getattr(args, "p", None),
            x=getattr(args, "x", None),
            mode=getattr(args, "mode", "auto"),
            class_sampling_rate=getattr(args, "class_sampling_rate", 0.0),
            seed=getattr(args, "seed", 0),
            tolerance=getattr(args, "tol", None),
            threads=getattr(args, "threads", None) or _threads_default(),
            chunk_size=getattr(args, "chunk_size", 1 << 22),
            format=args.format,
            assume_surjective=getattr(args, "assume_surjective", True),
            serre_conjectural=args.serre_conjectural,
            K=getattr(args, "K", None),
            p_lo=getattr(args, "p_lo", None),
            p_hi=getattr(args, "p_hi", None),
            h_K=getattr(args, "h_K", None),
        )
        if cfg.subcommand == "check":
            return cmd_check(cfg, out)
        if cfg.subcommand == "density":
            return cmd_density(cfg, out)
        if cfg.subcommand == "census":
            return cmd_census(cfg, out, args.out)
        return cmd_primescan(cfg, out)
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (CurveError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
