"""Spectrum of a 30x30 rectangular array with the linear and first-order cumulant models."""
import argparse
import time

from atomscatter import DriveConfig, build_rect_lattice, scan_spectrum
from atomscatter.observables import default_grid

from _common import write_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--ax", type=float, default=0.3)
    p.add_argument("--ay", type=float, default=0.9)
    p.add_argument("--side", type=int, default=30)
    p.add_argument("--step", type=float, default=0.2)
    p.add_argument("--out")
    args = p.parse_args()
    g = build_rect_lattice(args.side, args.side, args.ax, args.ay)
    grid = default_grid(-8, 8, args.step)
    t0 = time.perf_counter()
    lin = scan_spectrum(g, DriveConfig(0.1), "linear", grid)
    c1 = scan_spectrum(g, DriveConfig(0.1), "cumulant1", grid)
    print(f"{g.atom_count} atoms, {grid.size} detunings, {time.perf_counter() - t0:.1f} s")
    rows = [[x, a, b, c] for x, a, b, c in zip(grid, lin.od, c1.od, c1.converged)]
    write_table(args.out, ["detuning", "od_linear", "od_cumulant1", "converged"], rows)


if __name__ == "__main__":
    main()
