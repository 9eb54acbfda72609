#!/usr/bin/env python3
"""Step-size sweep for the radial integrator.

Integrates the radial profile from a matched start for each requested
(n, k) pair over a geometric ladder of step sizes, compares against the
closed-form solution, and prints the sup deviation plus the observed
convergence order between successive rungs.

Usage:
  python scripts/radial_convergence.py
  python scripts/radial_convergence.py --pairs 3,1 5,2 --v0 2.0 --steps 5
  python scripts/radial_convergence.py --csv out.csv
"""

import argparse
import sys

from conforma.cones import make_sigma_k_operator
from conforma.radial import bubble_deviation, matched_bubble, order_estimate, shoot
from conforma.reporting import write_csv


def parse_pair(text):
    n, k = text.split(",")
    return int(n), int(k)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["3,1", "4,2", "5,2"],
                    help="n,k pairs to sweep")
    ap.add_argument("--v0", type=float, default=1.0)
    ap.add_argument("--h0", type=float, default=4e-3, help="coarsest step")
    ap.add_argument("--steps", type=int, default=4, help="number of halvings")
    ap.add_argument("--r-max", type=float, default=0.9)
    ap.add_argument("--csv", default=None, help="write the table here as CSV")
    args = ap.parse_args(argv)

    rows = []
    for text in args.pairs:
        n, k = parse_pair(text)
        op = make_sigma_k_operator(n, k)
        params = matched_bubble(op, args.v0)
        hs, devs = [], []
        print(f"\n(n, k) = ({n}, {k}), v0 = {args.v0}, r_max = {args.r_max}")
        print(f"{'h':>10}  {'sup deviation':>14}  {'order':>6}")
        for i in range(args.steps):
            h = args.h0 / 2**i
            prof = shoot(op, args.v0, h=h, r_max=args.r_max)
            dev = bubble_deviation(prof, params)
            hs.append(h)
            devs.append(dev)
            if i == 0:
                order = ""
            else:
                order = f"{order_estimate(hs[-2:], devs[-2:]):.2f}"
            print(f"{h:10.2e}  {dev:14.3e}  {order:>6}")
            rows.append({"n": n, "k": k, "h": h, "deviation": dev})
        print(f"least-squares order over the ladder: "
              f"{order_estimate(hs, devs):.3f}")

    if args.csv:
        write_csv(args.csv, ("n", "k", "h", "deviation"),
                  [(r["n"], r["k"], r["h"], r["deviation"]) for r in rows])
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
