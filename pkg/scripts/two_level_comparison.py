"""Two degenerate levels: closed-form SEA relaxation against the Lemanska-Jaeger comparison model.

Prints both rates and entropy productions at a few occupations, the transit
times between decades, and writes the time series to CSV.

    python scripts/two_level_comparison.py --out runs/two_level.csv [--p0 0.25] [--upsilon 0.5]
"""

import argparse
import math
from pathlib import Path

import numpy as np

from searelax import io
from searelax.twolevel import LEMANSKA, SEA, closed_form, entropy_rate_two_level, lemanska_path, rate_two_level, transit_time


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/two_level.csv"))
    ap.add_argument("--p0", type=float, default=0.25)
    ap.add_argument("--upsilon", type=float, default=0.5)
    args = ap.parse_args()

    print(f"{'p':>8} {'dp/dt SEA':>12} {'dp/dt LJ':>12} {'dS/dt SEA':>12} {'dS/dt LJ':>12}")
    for p in (1e-6, 0.01, 0.1, 0.25, 0.4, 0.49):
        print(f"{p:8.2g} {rate_two_level(p, SEA):12.5g} {rate_two_level(p, LEMANSKA, upsilon=args.upsilon):12.5g} "
              f"{entropy_rate_two_level(p, SEA):12.5g} "
              f"{entropy_rate_two_level(p, LEMANSKA, upsilon=args.upsilon):12.5g}")

    print("\ntransit 10^-2n -> 10^-2 against ln n:")
    for n in range(2, 7):
        t = transit_time(10.0 ** (-2 * n), 1e-2)
        print(f"  n = {n}: {t:.5f}  ln n = {math.log(n):.5f}")

    t = np.linspace(-5.0, 5.0, 201)
    p_sea = closed_form(args.p0, t)
    p_lj = lemanska_path(args.p0, t, args.upsilon)
    rows = [[ti, ps, None if np.isnan(pl) else pl] for ti, ps, pl in zip(t, p_sea, p_lj)]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_table(["t", "p_sea", "p_lemanska"], rows, "csv", args.out)
    gone = t[np.isnan(p_lj)]
    if gone.size:
        print(f"\nLemanska path leaves (0, 1) going backward, before t = {gone.max():.2f}")


if __name__ == "__main__":
    main()
