"""Peak optical depth of a driven 2x2 array against lattice spacing, all solvers."""
import argparse

import numpy as np

from atomscatter import DriveConfig, build_rect_lattice, optical_depth, solve_point, transmission

from _common import write_table

SOLVERS = ("exact", "linear", "cumulant1", "cumulant2")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--omega0", type=float, default=0.1)
    p.add_argument("--detuning", type=float, default=0.0)
    p.add_argument("--out")
    args = p.parse_args()
    d = DriveConfig(args.omega0, 2.5, args.detuning)
    rows = []
    for a in np.round(np.arange(0.1, 1.51, 0.05), 3):
        g = build_rect_lattice(2, 2, a, a)
        rows.append([a] + [optical_depth(transmission(solve_point(g, d, s).sigma, g, d)) for s in SOLVERS])
    write_table(args.out, ["a"] + [f"od_{s}" for s in SOLVERS], rows)


if __name__ == "__main__":
    main()
