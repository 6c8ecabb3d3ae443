"""Transmission, optical depth, spectra and Lorentzian line fits."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitFailedError, InvalidArgumentError, UndefinedTransmissionError
from .geometry import K, DriveConfig, EnsembleGeometry
from .solvers import Model, check_capacity

OD_FLOOR = 1e-6


def transmission(sigmas, geometry: EnsembleGeometry, drive: DriveConfig) -> complex:
    """Forward field ratio T = 1 + i 3 Gamma/(Omega0 w0^2 k^2) sum_mu <sigma_mu> e^{-ikz_mu}."""
    if not drive.omega0 > 0:
        raise UndefinedTransmissionError("transmission is undefined without a drive (omega0 = 0)")
    pref = 3.0 * geometry.gamma / (drive.omega0 * drive.waist**2 * K**2)
    phase = np.exp(-1j * K * geometry.positions[:, 2])
    return complex(1.0 + 1j * pref * np.sum(np.asarray(sigmas) * phase))


def optical_depth(t) -> float:
    return float(-np.log(np.abs(t) ** 2))


@dataclass
class SpectrumResult:
    detunings: np.ndarray
    transmission: np.ndarray
    od: np.ndarray
    solver_tag: str
    converged: np.ndarray
    iterations: np.ndarray | None = None
    points: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.transmission = np.asarray(self.transmission, dtype=complex)
        self.od = np.asarray(self.od, dtype=float)
        self.converged = np.asarray(self.converged, dtype=bool)
        if self.detunings.size > 1 and np.any(np.diff(self.detunings) <= 0):
            raise InvalidArgumentError("detuning grid must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["detuning", "re_T", "im_T", "od", "converged"])
        for d, t, o, c in zip(self.detunings, self.transmission, self.od, self.converged):
            w.writerow([repr(float(d)), repr(float(t.real)), repr(float(t.imag)), repr(float(o)), int(c)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, solver_tag: str = "unknown") -> "SpectrumResult":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise InvalidArgumentError("spectrum CSV has no rows")
        try:
            det = [float(r["detuning"]) for r in rows]
            t = [complex(float(r["re_T"]), float(r["im_T"])) for r in rows]
            od = [float(r["od"]) for r in rows]
            conv = [bool(int(r["converged"])) for r in rows]
        except (KeyError, ValueError) as exc:
            raise InvalidArgumentError(f"malformed spectrum CSV: {exc}") from exc
        return cls(det, t, od, solver_tag, conv)


def default_grid(lo=-8.0, hi=8.0, step=0.1) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 12)


def scan_spectrum(geometry: EnsembleGeometry, drive: DriveConfig, solver: str, detunings=None,
                  keep_points=False, **options) -> SpectrumResult:
    """One steady state per detuning, warm-started along the grid."""
    detunings = default_grid() if detunings is None else np.asarray(detunings, dtype=float)
    if detunings.size == 0:
        raise InvalidArgumentError("detuning grid is empty")
    check_capacity(solver, geometry.atom_count, options.get("exact_cap", 8))
    model = Model(geometry, drive, solver, **options)
    ts, conv, iters, pts = [], [], [], []
    for d in detunings:
        res = model.solve(detuning=d)
        ts.append(transmission(res.sigma, geometry, drive))
        conv.append(res.converged)
        iters.append(res.iterations)
        if keep_points:
            pts.append(res)
    ts = np.array(ts)
    od = -np.log(np.abs(ts) ** 2)
    return SpectrumResult(detunings, ts, od, solver, conv, np.array(iters), pts)


@dataclass
class LorentzParams:
    od_max: float
    nu: float
    w: float
    fit_residual: float

    def to_json(self) -> str:
        rec = asdict(self)
        rec["units"] = {"od_max": "dimensionless", "nu": "gamma", "w": "gamma"}
        return json.dumps(rec, indent=2, sort_keys=True)


def lorentzian(delta, od_max, nu, w):
    return od_max * w**2 / (4.0 * (np.asarray(delta) - nu) ** 2 + w**2)


def _fwhm(x, y, i_peak):
    half = y[i_peak] / 2.0
    left = x[0]
    for i in range(i_peak, 0, -1):
        if y[i - 1] <= half:
            left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
            break
    right = x[-1]
    for i in range(i_peak, len(x) - 1):
        if y[i + 1] <= half:
            right = x[i] + (y[i] - half) * (x[i + 1] - x[i]) / (y[i] - y[i + 1])
            break
    return max(right - left, np.min(np.diff(x)) if len(x) > 1 else 1.0)


def fit_lorentzian(spectrum: SpectrumResult, max_nfev: int = 2000) -> LorentzParams:
    mask = spectrum.converged & np.isfinite(spectrum.od)
    x = spectrum.detunings[mask]
    y = spectrum.od[mask]
    if x.size < 5:
        raise FitFailedError(f"need at least 5 converged points, have {x.size}")
    i_peak = int(np.argmax(y))
    if not y[i_peak] > 0:
        raise FitFailedError("spectrum has no positive peak")
    p0 = np.array([y[i_peak], x[i_peak], _fwhm(x, y, i_peak)])

    def resid(p):
        return lorentzian(x, *p) - y

    sol = least_squares(resid, p0, method="lm", xtol=1e-10, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    od_max, nu, w = sol.x
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    params = LorentzParams(float(od_max), float(nu), float(abs(w)), rms)
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)) or od_max < 0:
        raise FitFailedError(f"Lorentzian fit failed: {sol.message}", params=params, residual=rms)
    return params


def max_relative_error(spectrum_test: SpectrumResult, spectrum_reference: SpectrumResult,
                       floor: float = OD_FLOOR) -> float:
    """max |OD_test - OD_ref| / OD_ref over converged points with OD_ref >= floor."""
    a, b = spectrum_test, spectrum_reference
    if a.detunings.shape != b.detunings.shape or not np.allclose(a.detunings, b.detunings, rtol=0, atol=1e-12):
        raise InvalidArgumentError("spectra are on different detuning grids")
    mask = a.converged & b.converged & (np.abs(b.od) >= floor)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a.od[mask] - b.od[mask]) / np.abs(b.od[mask])))
