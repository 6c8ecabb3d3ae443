"""Seed-averaged Lorentzian parameters of a Gaussian cloud against atom number."""
import argparse

import numpy as np

from atomscatter import DriveConfig, fit_lorentzian, sample_gaussian_cloud, scan_spectrum

from _common import write_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 12, 16])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--solvers", nargs="+", default=["linear", "cumulant1", "cumulant2"])
    p.add_argument("--out")
    args = p.parse_args()
    rows = []
    for n in args.sizes:
        for s in args.solvers:
            fits = []
            for seed in range(args.seeds):
                g = sample_gaussian_cloud(n, (0.25, 0.25, 1.5), seed=seed)
                f = fit_lorentzian(scan_spectrum(g, DriveConfig(0.1), s))
                fits.append((f.od_max, f.nu, f.w))
            m = np.mean(fits, axis=0)
            rows.append([n, s, *m])
            print(n, s, *np.round(m, 5), flush=True)
    write_table(args.out, ["n", "solver", "od_max", "nu", "w"], rows)


if __name__ == "__main__":
    main()
