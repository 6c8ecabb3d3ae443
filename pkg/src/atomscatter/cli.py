"""Command-line front end: spectrum, scan, fit, compare.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path


from .config import RunConfig, check_compatibility, validate_config
from .errors import CapacityError, ConfigError, InvalidArgumentError, ScatterError
from .observables import (
    SpectrumResult,
    fit_lorentzian,
    max_relative_error,
    optical_depth,
    scan_spectrum,
    transmission,
)
from .solvers import Model

log = logging.getLogger("atomscatter")

UNITS = {"detuning": "gamma", "omega0": "gamma", "waist": "lambda", "length": "lambda", "nu": "gamma", "w": "gamma"}


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fit_record(spec: SpectrumResult) -> dict:
    try:
        p = fit_lorentzian(spec)
    except ScatterError as exc:
        return {"error": str(exc)}
    return {"od_max": p.od_max, "nu": p.nu, "w": p.w, "fit_residual": p.fit_residual}


def _spectrum_json(spec: SpectrumResult) -> str:
    rows = [
        {"detuning": float(d), "re_T": float(t.real), "im_T": float(t.imag), "od": float(o), "converged": bool(c)}
        for d, t, o, c in zip(spec.detunings, spec.transmission, spec.od, spec.converged)
    ]
    return json.dumps({"solver": spec.solver_tag, "units": {"detuning": "gamma"}, "rows": rows}, indent=2) + "\n"


def run_spectrum(cfg: RunConfig, out_dir, threads: int = 1) -> dict:
    check_compatibility(cfg)
    geometry = cfg.geometry.build()
    opts = cfg.solver_options()

    def one(solver):
        return scan_spectrum(geometry, cfg.drive, solver, cfg.detunings, **opts)

    spectra = dict(zip(cfg.solvers, _map(one, list(cfg.solvers), threads)))
    out_dir = Path(out_dir)
    for solver, spec in spectra.items():
        if cfg.output_format == "csv":
            atomic_write(out_dir / f"spectrum_{solver}.csv", spec.to_csv())
        else:
            atomic_write(out_dir / f"spectrum_{solver}.json", _spectrum_json(spec))
    summary = {
        "units": UNITS,
        "atom_count": geometry.atom_count,
        "drive": asdict(cfg.drive),
        "solvers": list(cfg.solvers),
        "all_converged": {s: bool(sp.converged.all()) for s, sp in spectra.items()},
        "fits": {s: _fit_record(sp) for s, sp in spectra.items()},
    }
    if "exact" in spectra:
        summary["max_relative_error_vs_exact"] = {
            s: max_relative_error(sp, spectra["exact"]) for s, sp in spectra.items() if s != "exact"
        }
    atomic_write(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _scan_point(cfg: RunConfig, value: float):
    """(geometry, drive) for one scan value."""
    var = cfg.scan.variable
    g, d = cfg.geometry, cfg.drive
    if var == "spacing":
        return g.build(ax=float(value), ay=float(value)), d
    if var == "size":
        return g.build(nx=int(value), ny=int(value)), d
    if var == "atom-number":
        return g.build(n=int(value)), d
    if var == "intensity":
        return g.build(), d.with_omega0(float(value))
    raise AssertionError(var)


def run_scan(cfg: RunConfig, out_dir, threads: int = 1) -> list:
    check_compatibility(cfg)
    opts = cfg.solver_options()
    var = cfg.scan.variable
    values = list(cfg.scan.values)
    solvers = list(cfg.solvers)

    if var == "detuning":
        geometry = cfg.geometry.build()
        specs = _map(lambda s: scan_spectrum(geometry, cfg.drive, s, cfg.detunings, **opts), solvers, threads)
        header = ["detuning"] + [c for s in solvers for c in (f"od_{s}", f"converged_{s}")]
        rows = []
        for i, v in enumerate(values):
            row = [float(v)]
            for sp in specs:
                row += [float(sp.od[i]), bool(sp.converged[i])]
            rows.append(row)
    else:
        tasks = [(v, s) for v in values for s in solvers]

        def one(task):
            value, solver = task
            try:
                geometry, drive = _scan_point(cfg, value)
                if cfg.scan.quantity == "od":
                    res = Model(geometry, drive, solver, **opts).solve()
                    return [optical_depth(transmission(res.sigma, geometry, drive))], res.converged
                sp = scan_spectrum(geometry, drive, solver, cfg.detunings, **opts)
                p = fit_lorentzian(sp)
                return [p.od_max, p.nu, p.w], bool(sp.converged.all())
            except CapacityError:
                raise
            except ScatterError as exc:
                log.warning("%s=%s solver=%s failed: %s", var, value, solver, exc)
                width = 1 if cfg.scan.quantity == "od" else 3
                return [float("nan")] * width, False

        results = _map(one, tasks, threads)
        cols = ["od"] if cfg.scan.quantity == "od" else ["od_max", "nu", "w"]
        header = [var] + [f"{c}_{s}" for s in solvers for c in cols + ["converged"]]
        rows = []
        for i, v in enumerate(values):
            row = [float(v)]
            for j in range(len(solvers)):
                vals, conv = results[i * len(solvers) + j]
                row += [float(x) for x in vals] + [bool(conv)]
            rows.append(row)

    out_dir = Path(out_dir)
    if cfg.output_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([int(x) if isinstance(x, bool) else repr(x) for x in row])
        atomic_write(out_dir / "scan.csv", buf.getvalue())
    else:
        recs = [dict(zip(header, row)) for row in rows]
        atomic_write(out_dir / "scan.json", json.dumps({"units": UNITS, "rows": recs}, indent=2) + "\n")
    return [header] + rows


def _load_spectrum(path) -> SpectrumResult:
    return SpectrumResult.from_csv(Path(path).read_text(), solver_tag=Path(path).stem)


def _read_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    cfg = validate_config(text)
    if args.seed is not None:
        cfg.geometry = replace(cfg.geometry, seed=args.seed)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atomscatter", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "scan"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="DIR", help="output directory (default: config output.path)")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1, metavar="N")
        sp.add_argument("--seed", type=int, metavar="S", help="override the cloud seed")
    fp = sub.add_parser("fit", help="fit a Lorentzian to a spectrum CSV")
    fp.add_argument("spectrum")
    fp.add_argument("--out", metavar="FILE")
    cp = sub.add_parser("compare", help="max relative OD error of TEST against REFERENCE")
    cp.add_argument("test")
    cp.add_argument("reference")
    cp.add_argument("--out", metavar="FILE")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command in ("spectrum", "scan"):
            cfg = _read_config(args)
            out = args.out or cfg.output_path
            threads = max(1, args.threads)
            if args.command == "spectrum":
                summary = run_spectrum(cfg, out, threads)
                print(json.dumps(summary.get("max_relative_error_vs_exact", summary["fits"]), indent=2))
            else:
                rows = run_scan(cfg, out, threads)
                print(f"wrote {len(rows) - 1} rows to {out}")
        elif args.command == "fit":
            text = fit_lorentzian(_load_spectrum(args.spectrum)).to_json() + "\n"
            atomic_write(args.out, text) if args.out else sys.stdout.write(text)
        elif args.command == "compare":
            err = max_relative_error(_load_spectrum(args.test), _load_spectrum(args.reference))
            text = json.dumps({"max_relative_error": err}) + "\n"
            atomic_write(args.out, text) if args.out else sys.stdout.write(text)
    except (ConfigError, CapacityError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScatterError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
