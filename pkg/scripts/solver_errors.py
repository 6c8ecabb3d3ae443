"""Spectra of a 2x2 array for every solver, with OD errors against the exact solution."""
import argparse

from atomscatter import DriveConfig, build_rect_lattice, max_relative_error, scan_spectrum

from _common import write_table

APPROX = ("linear", "cumulant1", "cumulant2")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=0.7)
    p.add_argument("--omega0", type=float, default=0.1)
    p.add_argument("--out")
    args = p.parse_args()
    g = build_rect_lattice(2, 2, args.a, args.a)
    d = DriveConfig(args.omega0)
    ex = scan_spectrum(g, d, "exact")
    specs = {s: scan_spectrum(g, d, s) for s in APPROX}
    rows = []
    for i, x in enumerate(ex.detunings):
        row = [x, ex.od[i]]
        for s in APPROX:
            row += [specs[s].od[i], abs(specs[s].od[i] - ex.od[i]) / ex.od[i]]
        rows.append(row)
    write_table(args.out, ["detuning", "od_exact"] + [c for s in APPROX for c in (f"od_{s}", f"relerr_{s}")], rows)
    for s in APPROX:
        print(f"max relative error {s}: {max_relative_error(specs[s], ex):.4f}")


if __name__ == "__main__":
    main()
