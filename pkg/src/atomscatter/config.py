"""Run configuration: YAML/JSON text, strict keys, reference default parameters."""
from __future__ import annotations

import difflib
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .errors import ConfigError
from .exact import DEFAULT_CAP
from .geometry import (
    DEFAULT_MIN_SEPARATION,
    DriveConfig,
    EnsembleGeometry,
    build_rect_lattice,
    load_geometry,
    sample_gaussian_cloud,
)
from .observables import default_grid
from .solvers import SOLVERS

SCAN_VARIABLES = ("detuning", "spacing", "size", "intensity", "atom-number")
QUANTITIES = ("od", "fit")
FORMATS = ("csv", "json")

_SECTIONS = {
    "": ("geometry", "drive", "solvers", "scan", "output", "tolerances"),
    "geometry": ("kind", "nx", "ny", "a", "ax", "ay", "n", "rms", "seed", "min_separation", "path"),
    "drive": ("omega0", "waist", "detuning", "detunings"),
    "drive.detunings": ("start", "stop", "step", "values"),
    "scan": ("variable", "start", "stop", "step", "values", "quantity"),
    "output": ("format", "path"),
    "tolerances": ("tol", "max_iter", "exact_cap", "jacobian", "kernel_min_separation"),
}


@dataclass
class GeometrySpec:
    kind: str = "lattice"
    nx: int = 2
    ny: int = 2
    ax: float = 0.7
    ay: float = 0.7
    n: int = 10
    rms: tuple = (0.25, 0.25, 1.5)
    seed: int = 0
    min_separation: float = DEFAULT_MIN_SEPARATION
    path: str | None = None

    def build(self, **override) -> EnsembleGeometry:
        spec = replace(self, **override)
        if spec.kind == "lattice":
            return build_rect_lattice(spec.nx, spec.ny, spec.ax, spec.ay)
        if spec.kind == "cloud":
            return sample_gaussian_cloud(spec.n, spec.rms, spec.seed, spec.min_separation)
        return load_geometry(spec.path)

    def atom_count(self) -> int:
        if self.kind == "lattice":
            return self.nx * self.ny
        if self.kind == "cloud":
            return self.n
        return self.build().atom_count


@dataclass
class ScanSpec:
    variable: str = "detuning"
    values: np.ndarray = field(default_factory=default_grid)
    quantity: str = "od"


@dataclass
class Tolerances:
    tol: float = 1e-10
    max_iter: int | None = None
    exact_cap: int = DEFAULT_CAP
    jacobian: str = "analytic"
    kernel_min_separation: float = 1e-3


@dataclass
class RunConfig:
    geometry: GeometrySpec
    drive: DriveConfig
    detunings: np.ndarray
    solvers: tuple
    scan: ScanSpec
    output_format: str = "csv"
    output_path: str = "out"
    tolerances: Tolerances = field(default_factory=Tolerances)

    def solver_options(self) -> dict:
        t = self.tolerances
        return {"tol": t.tol, "max_iter": t.max_iter, "exact_cap": t.exact_cap, "jacobian": t.jacobian,
                "kernel_min_separation": t.kernel_min_separation}


def _check_keys(section: str, raw: dict) -> None:
    allowed = _SECTIONS[section]
    where = f" in section '{section}'" if section else ""
    for key in raw:
        if key not in allowed:
            hint = difflib.get_close_matches(str(key), allowed, n=1)
            msg = f"unknown key '{key}'{where}"
            msg += f"; did you mean '{hint[0]}'?" if hint else f"; allowed: {', '.join(allowed)}"
            raise ConfigError(msg, key=key)


def _section(raw: dict, name: str) -> dict:
    val = raw.get(name, {}) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"'{name}' must be a mapping", key=name)
    _check_keys(name, val)
    return val


def _number(sec, key, default, *, positive=False, nonneg=False, integer=False, prefix=""):
    val = sec.get(key, default)
    full = f"{prefix}.{key}" if prefix else key
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"'{full}' must be a number, got {val!r}", key=full)
    if integer and int(val) != val:
        raise ConfigError(f"'{full}' must be an integer, got {val!r}", key=full)
    if positive and not val > 0:
        raise ConfigError(f"'{full}' must be positive, got {val!r}", key=full)
    if nonneg and not val >= 0:
        raise ConfigError(f"'{full}' must be non-negative, got {val!r}", key=full)
    return int(val) if integer else float(val)


def _choice(sec, key, default, allowed, prefix=""):
    val = sec.get(key, default)
    full = f"{prefix}.{key}" if prefix else key
    if val not in allowed:
        raise ConfigError(f"'{full}' must be one of {', '.join(allowed)}, got {val!r}", key=full)
    return val


def _grid(sec: dict, prefix: str, default_lo=-8.0, default_hi=8.0, default_step=0.1) -> np.ndarray:
    if "values" in sec:
        if any(k in sec for k in ("start", "stop", "step")):
            raise ConfigError(f"'{prefix}' takes either 'values' or start/stop/step, not both", key=prefix)
        vals = sec["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"'{prefix}.values' must be a non-empty list", key=f"{prefix}.values")
        try:
            arr = np.array([float(v) for v in vals])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"'{prefix}.values' must be numbers", key=f"{prefix}.values") from exc
    else:
        lo = _number(sec, "start", default_lo, prefix=prefix)
        hi = _number(sec, "stop", default_hi, prefix=prefix)
        step = _number(sec, "step", default_step, positive=True, prefix=prefix)
        if hi < lo:
            raise ConfigError(f"'{prefix}.stop' must not be below '{prefix}.start'", key=f"{prefix}.stop")
        arr = default_grid(lo, hi, step)
    if arr.size > 1 and np.any(np.diff(arr) <= 0):
        raise ConfigError(f"'{prefix}' values must be strictly increasing", key=prefix)
    return arr


def _geometry(sec: dict) -> GeometrySpec:
    kind = _choice(sec, "kind", "lattice", ("lattice", "cloud", "file"), "geometry")
    spec = GeometrySpec(kind=kind)
    if kind == "lattice":
        for k in ("n", "rms", "seed", "min_separation", "path"):
            if k in sec:
                raise ConfigError(f"'geometry.{k}' does not apply to a lattice", key=f"geometry.{k}")
        spec.nx = _number(sec, "nx", 2, positive=True, integer=True, prefix="geometry")
        spec.ny = _number(sec, "ny", spec.nx, positive=True, integer=True, prefix="geometry")
        a = _number(sec, "a", 0.7, positive=True, prefix="geometry")
        spec.ax = _number(sec, "ax", a, positive=True, prefix="geometry")
        spec.ay = _number(sec, "ay", a, positive=True, prefix="geometry")
    elif kind == "cloud":
        for k in ("nx", "ny", "a", "ax", "ay", "path"):
            if k in sec:
                raise ConfigError(f"'geometry.{k}' does not apply to a cloud", key=f"geometry.{k}")
        spec.n = _number(sec, "n", 10, positive=True, integer=True, prefix="geometry")
        rms = sec.get("rms", [0.25, 0.25, 1.5])
        if not (isinstance(rms, list) and len(rms) == 3 and all(isinstance(r, (int, float)) and r > 0 for r in rms)):
            raise ConfigError("'geometry.rms' must be a list of three positive numbers", key="geometry.rms")
        spec.rms = tuple(float(r) for r in rms)
        spec.seed = _number(sec, "seed", 0, integer=True, prefix="geometry")
        spec.min_separation = _number(sec, "min_separation", DEFAULT_MIN_SEPARATION, nonneg=True, prefix="geometry")
    else:
        if "path" not in sec:
            raise ConfigError("'geometry.path' is required for kind 'file'", key="geometry.path")
        spec.path = str(sec["path"])
    return spec


def validate_config(raw_text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(raw_text) if raw_text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    _check_keys("", raw)

    geom = _geometry(_section(raw, "geometry"))

    dsec = _section(raw, "drive")
    omega0 = _number(dsec, "omega0", 0.1, nonneg=True, prefix="drive")
    waist = _number(dsec, "waist", 2.5, positive=True, prefix="drive")
    detuning = _number(dsec, "detuning", 0.0, prefix="drive")
    gsec = dsec.get("detunings", {}) or {}
    if not isinstance(gsec, dict):
        raise ConfigError("'drive.detunings' must be a mapping", key="drive.detunings")
    _check_keys("drive.detunings", gsec)
    grid = _grid(gsec, "drive.detunings")

    solvers = raw.get("solvers", list(SOLVERS))
    if isinstance(solvers, str):
        solvers = [solvers]
    if not isinstance(solvers, list) or not solvers:
        raise ConfigError("'solvers' must be a non-empty list", key="solvers")
    for s in solvers:
        if s not in SOLVERS:
            hint = difflib.get_close_matches(str(s), SOLVERS, n=1)
            extra = f"; did you mean '{hint[0]}'?" if hint else ""
            raise ConfigError(f"unknown solver '{s}', allowed: {', '.join(SOLVERS)}{extra}", key="solvers")
    if len(set(solvers)) != len(solvers):
        raise ConfigError("'solvers' lists a solver twice", key="solvers")

    ssec = _section(raw, "scan")
    variable = _choice(ssec, "variable", "detuning", SCAN_VARIABLES, "scan")
    quantity = _choice(ssec, "quantity", "od", QUANTITIES, "scan")
    if variable == "detuning":
        if any(k in ssec for k in ("start", "stop", "step", "values")):
            raise ConfigError("a detuning scan takes its grid from 'drive.detunings'", key="scan")
        if quantity != "od":
            raise ConfigError("a detuning scan reports od; use 'fit' with another scan variable", key="scan.quantity")
        values = grid
    else:
        if not any(k in ssec for k in ("start", "stop", "values")):
            raise ConfigError(f"scan over '{variable}' needs 'values' or start/stop/step", key="scan")
        values = _grid(ssec, "scan")
    if variable in ("size", "atom-number"):
        if np.any(values < 1) or np.any(values != np.round(values)):
            raise ConfigError(f"'{variable}' scan values must be positive integers", key="scan.values")
    if variable == "size" and geom.kind != "lattice":
        raise ConfigError("size scans need a lattice geometry", key="scan.variable")
    if variable == "spacing" and geom.kind != "lattice":
        raise ConfigError("spacing scans need a lattice geometry", key="scan.variable")
    if variable == "atom-number" and geom.kind != "cloud":
        raise ConfigError("atom-number scans need a cloud geometry", key="scan.variable")
    if variable in ("spacing",) and np.any(values <= 0):
        raise ConfigError("spacing values must be positive", key="scan.values")
    if variable == "intensity" and np.any(values < 0):
        raise ConfigError("intensity values must be non-negative", key="scan.values")

    osec = _section(raw, "output")
    fmt = _choice(osec, "format", "csv", FORMATS, "output")
    path = str(osec.get("path", "out"))

    tsec = _section(raw, "tolerances")
    tol = Tolerances(
        tol=_number(tsec, "tol", 1e-10, positive=True, prefix="tolerances"),
        max_iter=_number(tsec, "max_iter", None, positive=True, integer=True, prefix="tolerances"),
        exact_cap=_number(tsec, "exact_cap", DEFAULT_CAP, positive=True, integer=True, prefix="tolerances"),
        jacobian=_choice(tsec, "jacobian", "analytic", ("analytic", "fd"), "tolerances"),
        kernel_min_separation=_number(tsec, "kernel_min_separation", 1e-3, positive=True, prefix="tolerances"),
    )

    cfg = RunConfig(
        geometry=geom,
        drive=DriveConfig(omega0, waist, detuning),
        detunings=grid,
        solvers=tuple(solvers),
        scan=ScanSpec(variable, values, quantity),
        output_format=fmt,
        output_path=path,
        tolerances=tol,
    )
    check_compatibility(cfg)
    return cfg


def max_atom_count(cfg: RunConfig) -> int:
    g = cfg.geometry
    if cfg.scan.variable == "size":
        return int(np.max(cfg.scan.values)) ** 2
    if cfg.scan.variable == "atom-number":
        return int(np.max(cfg.scan.values))
    return g.atom_count()


def check_compatibility(cfg: RunConfig) -> None:
    if "exact" in cfg.solvers:
        n = max_atom_count(cfg)
        if n > cfg.tolerances.exact_cap:
            raise ConfigError(
                f"solver 'exact' handles at most {cfg.tolerances.exact_cap} atoms but this run needs {n}",
                key="solvers",
            )
