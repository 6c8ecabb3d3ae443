"""Exact 2x2 spectra under increasing drive: peak OD, fitted shift and width."""
import argparse

from atomscatter import DriveConfig, build_rect_lattice, fit_lorentzian, scan_spectrum

from _common import write_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=0.3)
    p.add_argument("--solver", default="exact")
    p.add_argument("--out")
    args = p.parse_args()
    g = build_rect_lattice(2, 2, args.a, args.a)
    rows = []
    for om in (0.1, 0.3, 0.5, 1.0, 2.0):
        spec = scan_spectrum(g, DriveConfig(om), args.solver)
        f = fit_lorentzian(spec)
        rows.append([om, spec.od.max(), f.od_max, f.nu, f.w])
    write_table(args.out, ["omega0", "peak_od", "fit_od_max", "nu", "w"], rows)


if __name__ == "__main__":
    main()
