"""Verdict counts for a prime sweep of 497a1 over K = Q(sqrt(-11)).

7 is inert and 71 split in K, so N^- = 7 and the field-side hypothesis holds.
"""

import argparse
from collections import Counter

from choired.curve import load_curve
from choired.primescan import rows_to_tsv, scan_primes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=-11)
    ap.add_argument("--p-lo", type=int, default=5)
    ap.add_argument("--p-hi", type=int, default=20000)
    ap.add_argument("--serre-conjectural", action="store_true")
    ap.add_argument("--tsv", help="also write the full table here")
    args = ap.parse_args()

    rows = scan_primes(load_curve("497a1"), args.K, args.p_lo, args.p_hi, args.serre_conjectural)
    counts = Counter(r.verdict for r in rows)
    ss = sum(r.a_p == 0 for r in rows)
    print(f"{len(rows)} good primes in [{args.p_lo}, {args.p_hi}], {ss} supersingular")
    for verdict, n in sorted(counts.items()):
        print(f"  {verdict:<16}{n}")
    first = [r.p for r in rows if r.verdict == "guaranteed_ss"][:10]
    print(f"first guaranteed_ss primes: {first}")
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write(rows_to_tsv(rows))


if __name__ == "__main__":
    main()
