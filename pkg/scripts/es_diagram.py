"""Energy-entropy diagram data: equilibrium families and the sampled maximal entropy production.

    python scripts/es_diagram.py --out runs/es [--resolution 40] [--samples 200] [--seed 0] [--plot]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from searelax import io
from searelax.scenarios import EsScanConfig, equilibrium_families, es_scan

LEVELS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/es"))
    ap.add_argument("--resolution", type=int, default=40)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", action="store_true", help="also save a contour figure (needs matplotlib)")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    fams = equilibrium_families(LEVELS, 50)
    rows = [[str(f.mask), E, S, None if f.isolated else b]
            for f in fams for E, S, b in zip(f.energies, f.entropies, f.betas)]
    io.write_table(["mask", "E", "S", "beta"], rows, "csv", args.out / "families.csv")

    t0 = time.perf_counter()
    cfg = EsScanConfig(entropy_resolution=args.resolution, samples_per_point=args.samples, rng_seed=args.seed)
    scan = es_scan(LEVELS, cfg)
    io.write_table(io.SCAN_COLUMNS, scan.rows(), "csv", args.out / "scan.csv")
    rates = np.array([p.s_dot_max for p in scan.points])
    noise = np.array([p.noise_p95 for p in scan.points])
    print(f"{len(scan.points)} grid points in {time.perf_counter() - t0:.1f} s; "
          f"max rate {np.nanmax(rates):.4f}, median sampling gap {np.nanmedian(noise):.2e}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        E = np.array([p.E for p in scan.points]).reshape(-1, args.resolution)
        S = np.array([p.S for p in scan.points]).reshape(-1, args.resolution)
        fig, ax = plt.subplots(figsize=(6, 5))
        cs = ax.contourf(E, S, rates.reshape(E.shape), levels=20)
        fig.colorbar(cs, label="max dS/dt")
        for f in fams:
            style = "k." if f.isolated else "k-"
            ax.plot(f.energies, f.entropies, style, lw=0.7, ms=4)
        ax.set_xlabel("E")
        ax.set_ylabel("S / kB")
        fig.tight_layout()
        fig.savefig(args.out / "es_diagram.png", dpi=150)


if __name__ == "__main__":
    main()
