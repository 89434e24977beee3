"""Estimate c_p*, the share of choired fields (p split) with p | h_K.

The estimate is observational: it is printed next to the Cohen-Lenstra
prediction c_p for the whole family, with a 95% Wilson interval.
"""

import argparse

from choired.census import CensusOptions, run_census
from choired.curve import load_curve, prime_setting
from choired.density import cohen_lenstra_cp


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--curve", default="497a1")
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--x", type=float, default=1e7)
    ap.add_argument("--rate", type=float, default=0.01)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    curve = load_curve(args.curve)
    setting = prime_setting(curve, args.p)
    print(f"c_{args.p} (Cohen-Lenstra) = {cohen_lenstra_cp(args.p):.4f}")
    print("seed\tsampled\tp|h\tc_p*\tci_low\tci_high")
    for seed in range(args.seeds):
        opts = CensusOptions(class_sampling_rate=args.rate, seed=seed, workers=args.workers)
        rep = run_census(curve, setting, int(args.x), opts)
        est = rep.cp_star()
        if est is None:
            print(f"{seed}\t0\t0\t-\t-\t-")
            continue
        print(f"{seed}\t{rep.class_sampled}\t{rep.class_p_divides}\t{est[0]:.4f}\t{est[1]:.4f}\t{est[2]:.4f}")


if __name__ == "__main__":
    main()
