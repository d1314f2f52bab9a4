#!/usr/bin/env python3
"""Reproduce the headline figure set: run the recipes, render with plotkit.

Full fidelity takes a while (the scans dominate); --quick swaps in reduced
scan grids and shorter acquisitions for a fast end-to-end smoke run.

    python scripts/make_figures.py --out results [--quick] [--jobs 2]
"""

import argparse
import subprocess
import sys
from pathlib import Path


def sh(*args):
    print("+", " ".join(map(str, args)), flush=True)
    subprocess.run([str(a) for a in args], check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--quick", action="store_true",
                    help="reduced scan grids (CI-sized, ~15 min total)")
    args = ap.parse_args()
    out = Path(args.out)
    fig = out / "figures"
    fig.mkdir(parents=True, exist_ok=True)

    # cooled evolutions at the two wall frequencies, with spectra
    for recipe in ("fig2c", "fig2d"):
        sh("penningmd", "evolve", "--recipe", recipe, "--out", out / recipe)
    sh("plotkit", "crystal", "--in", out / "fig2c" / "equilibrium.csv",
       out / "fig2d" / "equilibrium.csv", "--out", fig / "crystals.png")
    sh("plotkit", "modes", "--in", out / "fig2d" / "modes.csv",
       "--out", fig / "modes_204.png")
    sh("plotkit", "energies", "--in", out / "fig2c" / "diagnostics.csv",
       "--out", fig / "energies_180.png")
    sh("plotkit", "energies", "--in", out / "fig2d" / "diagnostics.csv",
       "--out", fig / "energies_204.png")
    sh("plotkit", "spectrum", "--in", out / "fig2c" / "psd.csv",
       out / "fig2d" / "psd.csv", "--out", fig / "spectra.png")

    # linearized-vs-full comparison
    for recipe in ("fig3a", "fig3b"):
        sh("penningmd", "evolve", "--recipe", recipe, "--out", out / recipe)
        sh("plotkit", "energies", "--in", out / recipe / "diagnostics.csv",
           "--out", fig / f"energies_{recipe}.png")

    # N = 100 wall-frequency scans
    scan_args = ["--jobs", args.jobs]
    if args.quick:
        scan_args += ["--points", 5]
    for recipe in ("fig4b", "fig4b-lin", "fig4c"):
        sh("penningmd", "scan", "--recipe", recipe, "--out", out / recipe, *scan_args)
    sh("plotkit", "scan", "--in", out / "fig4b" / "scan.csv",
       out / "fig4b-lin" / "scan.csv", "--out", fig / "scan_free.png")
    sh("plotkit", "scan", "--in", out / "fig4c" / "scan.csv",
       "--out", fig / "scan_cooled.png")
    print(f"\nfigures in {fig}")


if __name__ == "__main__":
    sys.exit(main())
