"""Empirical choired densities against the closed form as x grows.

    python3 scripts/convergence.py --curve 497a1 --p 5 --x-max 1e7
"""

import argparse
import time

from choired.census import run_census
from choired.curve import load_curve, prime_setting


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--curve", default="497a1")
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--x-min", type=float, default=1e4)
    ap.add_argument("--x-max", type=float, default=1e7)
    args = ap.parse_args()

    curve = load_curve(args.curve)
    setting = prime_setting(curve, args.p)
    x = int(args.x_min)
    print("x\ttotal\tss_emp\tss_theory\tss_err\tcoprime_err\tseconds")
    while x <= args.x_max:
        t0 = time.perf_counter()
        rep = run_census(curve, setting, x)
        dt = time.perf_counter() - t0
        rows = {r.name: r for r in rep.rows()}
        ss, cop = rows["choired_ss_plus"], rows["coprime_fields"]
        print(f"{x}\t{rep.total_fields}\t{ss.empirical:.7f}\t{ss.theoretical:.7f}\t"
              f"{ss.abs_error:.2e}\t{cop.abs_error:.2e}\t{dt:.2f}")
        x *= 10


if __name__ == "__main__":
    main()
