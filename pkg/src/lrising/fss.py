"""Finite-size scaling analysis: crossings, critical fits, data collapse.

Input is always a table of (N, g, name, value, err) rows — `g` doubles as
the sweep variable for quench datasets.  Fits report plain regression
covariance errors.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

CSV_HEADER = ["N", "g", "name", "value", "err"]


@dataclass
class ScalingDataset:
    """Unique-keyed rows of a tabulated observable over (N, g)."""

    rows: dict = field(default_factory=dict)  # (N, g, name) -> (value, err)

    def add(self, N: int, g: float, name: str, value: float, err: float = 0.0) -> None:
        if N % 2:
            raise ValueError(f"N must be even, got {N}")
        if not (math.isfinite(g) and math.isfinite(value)):
            raise ValueError(f"non-finite row ({N}, {g}, {name}, {value})")
        key = (int(N), float(g), str(name))
        if key in self.rows:
            raise KeyError(f"duplicate dataset key {key}")
        self.rows[key] = (float(value), float(err))

    def sizes(self, name: str) -> list[int]:
        return sorted({k[0] for k in self.rows if k[2] == name})

    def curve(self, name: str, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        items = sorted(
            (k[1], v[0], v[1]) for k, v in self.rows.items() if k[2] == name and k[0] == N
        )
        if not items:
            raise KeyError(f"no rows for name={name!r}, N={N}")
        g, val, err = zip(*items)
        return np.array(g), np.array(val), np.array(err)

    def values_at(self, name: str, g: float) -> tuple[np.ndarray, np.ndarray]:
        """(sizes, values) of `name` sampled exactly at g."""
        items = sorted(
            (k[0], v[0]) for k, v in self.rows.items() if k[2] == name and k[1] == g
        )
        if not items:
            raise KeyError(f"no rows for name={name!r} at g={g}")
        n, val = zip(*items)
        return np.array(n, dtype=float), np.array(val)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for (N, g, name), (value, err) in sorted(self.rows.items()):
                writer.writerow([N, repr(g), name, repr(value), repr(err)])

    @classmethod
    def from_csv(cls, path) -> "ScalingDataset":
        ds = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header}")
            for row in reader:
                ds.add(int(row[0]), float(row[1]), row[2], float(row[3]), float(row[4]))
        return ds


# ---------------------------------------------------------------------------
# Binder crossings


@dataclass(frozen=True)
class CrossingResult:
    n1: int
    n2: int
    g_star: float
    bracket: tuple[float, float]
    n_sign_changes: int


def binder_crossing(dataset: ScalingDataset, n1: int, n2: int, name: str = "binder",
                    window: tuple[float, float] | None = None) -> CrossingResult:
    """Root of B_{N1}(g) - B_{N2}(g) via monotone interpolation + brentq.

    Requires the two curves to be sampled on grids that bracket a sign
    change; with several sign changes the one closest to the window center
    (or grid center) is taken and the count is reported.
    """
    if n1 == n2:
        raise ValueError("need two distinct sizes")
    a, b = min(n1, n2), max(n1, n2)
    g1, v1, _ = dataset.curve(name, a)
    g2, v2, _ = dataset.curve(name, b)
    lo = max(g1.min(), g2.min())
    hi = min(g1.max(), g2.max())
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if hi <= lo:
        raise ValueError("curves share no g range")
    f1 = PchipInterpolator(g1, v1)
    f2 = PchipInterpolator(g2, v2)
    grid = np.linspace(lo, hi, 800)
    diff = f1(grid) - f2(grid)
    signs = np.sign(diff)
    changes = np.nonzero(np.diff(signs) != 0)[0]
    if changes.size == 0:
        raise ValueError(
            f"no crossing: B_{a} - B_{b} does not change sign on [{lo:.4f}, {hi:.4f}]"
        )
    center = 0.5 * (lo + hi)
    k = changes[np.argmin(np.abs(grid[changes] - center))]
    root = brentq(lambda g: f1(g) - f2(g), grid[k], grid[k + 1], xtol=1e-6)
    return CrossingResult(a, b, float(root), (float(grid[k]), float(grid[k + 1])), int(changes.size))


# ---------------------------------------------------------------------------
# critical-point fit g*(N1 N2) = gc (1 + b (N1 N2)^-omega)


@dataclass
class CriticalFit:
    g_c: float
    b: float
    omega: float
    covariance: np.ndarray
    residual: float
    converged: bool
    accepted: bool
    n_iter: int
    message: str = ""

    @property
    def g_c_err(self) -> float:
        return float(np.sqrt(max(self.covariance[0, 0], 0.0)))


def _gn_model(p, x):
    gc, b, omega = p
    decay = x**(-omega)
    f = gc * (1.0 + b * decay)
    jac = np.column_stack([
        1.0 + b * decay,
        gc * decay,
        -gc * b * np.log(x) * decay,
    ])
    return f, jac


def fit_gc(products, g_stars, sigma=None, p0=None, max_iter: int = 200,
           step_tol: float = 1e-10) -> CriticalFit:
    """Damped Gauss-Newton fit of the crossing drift law.

    Converged when the parameter step drops below `step_tol` (or after
    `max_iter` sweeps); a singular normal matrix is reported on the last
    iterate instead of raising.
    """
    x = np.asarray(products, dtype=float)
    y = np.asarray(g_stars, dtype=float)
    if x.size < 4:
        raise ValueError("need at least 4 crossing points")
    w = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, dtype=float)
    if p0 is None:
        gc0 = y[np.argmax(x)]
        om0 = 1.0
        b0 = (y[np.argmin(x)] / gc0 - 1.0) * x.min() ** om0
        p = np.array([gc0, b0 if np.isfinite(b0) else 0.1, om0])
    else:
        p = np.array(p0, dtype=float)

    lam = 1e-3
    message, converged = "max iterations reached", False
    n_iter = 0
    f, jac = _gn_model(p, x)
    cost = float(np.sum((w * (f - y)) ** 2))
    for n_iter in range(1, max_iter + 1):
        r = w * (f - y)
        jw = jac * w[:, None]
        jtj = jw.T @ jw
        jtr = jw.T @ r
        solved = False
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), -jtr)
            except np.linalg.LinAlgError:
                message = "singular normal matrix"
                break
            p_new = p + step
            f_new, jac_new = _gn_model(p_new, x)
            cost_new = float(np.sum((w * (f_new - y)) ** 2))
            if np.isfinite(cost_new) and cost_new <= cost * (1 + 1e-14):
                solved = True
                break
            lam *= 10.0
        if not solved:
            if message != "singular normal matrix":
                message = "damping failed to find a descent step"
            break
        p, f, jac, cost = p_new, f_new, jac_new, cost_new
        lam = max(lam / 10.0, 1e-14)
        if np.linalg.norm(step) < step_tol:
            converged, message = True, "step below tolerance"
            break

    dof = max(x.size - 3, 1)
    s2 = cost / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ (jac * (w**2)[:, None]))
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.nan)
    gc, b, omega = p
    accepted = bool(converged and omega > 0 and gc > 0)
    return CriticalFit(float(gc), float(b), float(omega), cov, float(np.sqrt(cost / x.size)),
                       converged, accepted, n_iter, message)


# ---------------------------------------------------------------------------
# power laws


@dataclass(frozen=True)
class PowerlawFit:
    exponent: float
    amplitude: float
    stderr: float
    n_points: int
    window: tuple[float, float] | None = None

    def to_json_dict(self) -> dict:
        return {
            "parameter": "exponent",
            "value": self.exponent,
            "stderr": self.stderr,
            "amplitude": self.amplitude,
            "n_points": self.n_points,
            "window": list(self.window) if self.window else None,
        }


def powerlaw_fit(x, y, window: tuple[float, float] | None = None) -> PowerlawFit:
    """OLS of log y on log x; the slope is the power-law exponent."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        keep = (x >= window[0]) & (x <= window[1])
        x, y = x[keep], y[keep]
    if x.size < 3:
        raise ValueError("need at least 3 points inside the window")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    if x.size == 3:
        coeffs = np.polyfit(lx, ly, 1)
        resid = ly - np.polyval(coeffs, lx)
        var = float(np.sum(resid**2))  # dof = n - 2 = 1
        sxx = float(np.sum((lx - lx.mean()) ** 2))
        stderr = float(np.sqrt(var / sxx))
    else:
        coeffs, cov = np.polyfit(lx, ly, 1, cov=True)
        stderr = float(np.sqrt(cov[0, 0]))
    return PowerlawFit(float(coeffs[0]), float(np.exp(coeffs[1])), stderr, int(x.size), window)


@dataclass(frozen=True)
class NuFit:
    nu: float
    nu_err: float
    slope_fit: PowerlawFit


def nu_from_moments(sizes, d_m2, d_m4) -> NuFit:
    """1/nu from (d<m^2>/dg)^2 / |d<m^4>/dg| ~ N^(1/nu) at the critical point."""
    sizes = np.asarray(sizes, dtype=float)
    ratio = np.asarray(d_m2, dtype=float) ** 2 / np.abs(np.asarray(d_m4, dtype=float))
    fit = powerlaw_fit(sizes, ratio)
    inv_nu = fit.exponent
    if inv_nu <= 0:
        raise ValueError(f"non-positive 1/nu slope {inv_nu}")
    nu = 1.0 / inv_nu
    return NuFit(nu, fit.stderr * nu**2, fit)


# ---------------------------------------------------------------------------
# collapse quality


@dataclass(frozen=True)
class Chi2Result:
    chi2: float
    n_points: int
    n_excluded: int
    reference_size: int


def collapse_chi2(curves: dict, window: tuple[float, float] | None = (-10.0, 10.0),
                  reference: int | None = None) -> Chi2Result:
    """Chi-squared distance of scaled curves from the largest-N reference.

    `curves` maps N -> (x, phi).  The reference scaling function is the
    linearly interpolated largest-N curve; points outside the window or
    the reference range are skipped, non-positive reference values are
    excluded and counted.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two sizes")
    ref_n = reference if reference is not None else max(curves)
    xr, yr = curves[ref_n]
    order = np.argsort(xr)
    xr, yr = np.asarray(xr)[order], np.asarray(yr)[order]
    chi2 = 0.0
    n_pts = 0
    n_excl = 0
    for n, (x, y) in curves.items():
        if n == ref_n:
            continue
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = (x >= xr[0]) & (x <= xr[-1])
        if window is not None:
            keep &= (x >= window[0]) & (x <= window[1])
        ref_vals = np.interp(x[keep], xr, yr)
        for rv, yv in zip(ref_vals, y[keep]):
            if rv <= 0:
                n_excl += 1
                continue
            chi2 += (rv - yv) ** 2 / rv
            n_pts += 1
    return Chi2Result(float(chi2), n_pts, n_excl, ref_n)


# ---------------------------------------------------------------------------
# exponent bundles


@dataclass(frozen=True)
class ExponentSet:
    nu: float
    z: float
    beta_m: float
    beta_lambda: float
    nu_err: float = 0.0
    z_err: float = 0.0
    beta_m_err: float = 0.0
    beta_lambda_err: float = 0.0

    def __post_init__(self):
        for name in ("nu", "z", "beta_m", "beta_lambda"):
            if getattr(self, name) <= 0:
                raise ValueError(f"exponent {name} must be positive")

    @property
    def mu_theo(self) -> float:
        """Magnitude of the adiabatic-impulse boundary exponent, 1/(z nu + 1)."""
        return 1.0 / (self.z * self.nu + 1.0)

    @property
    def mu_theo_err(self) -> float:
        denom = (self.z * self.nu + 1.0) ** 2
        return float(np.hypot(self.nu * self.z_err, self.z * self.nu_err) / denom)

    def to_json_dict(self) -> dict:
        return asdict(self)


def write_fit_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
