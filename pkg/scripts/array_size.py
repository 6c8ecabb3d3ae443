"""Resonant OD of square arrays of growing side length, linear vs first-order cumulant."""
import argparse

from atomscatter import DriveConfig, build_rect_lattice, optical_depth, solve_point, transmission

from _common import write_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=0.8)
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12, 16, 20])
    p.add_argument("--out")
    args = p.parse_args()
    d = DriveConfig(0.1)
    rows = []
    for L in args.sizes:
        g = build_rect_lattice(L, L, args.a, args.a)
        lin = optical_depth(transmission(solve_point(g, d, "linear").sigma, g, d))
        r = solve_point(g, d, "cumulant1")
        c1 = optical_depth(transmission(r.sigma, g, d))
        rows.append([L, lin, c1, lin - c1, r.converged])
    write_table(args.out, ["L", "od_linear", "od_cumulant1", "gap", "converged"], rows)


if __name__ == "__main__":
    main()
