"""End-to-end equilibrium analysis: locate g_c, extract exponents, collapse.

These drivers wire the eigensolves into the fitting layer.  Grids are
explicit (never auto-selected silently): a coarse scan on the two smallest
sizes brackets the crossing region, a fine grid samples the Binder curves
for all sizes, and one refinement pass tightens each pairwise bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import fss
from .model import CouplingSpec, build_couplings
from .observables import magnetization_moments
from .spectra import Spectra, energy_gap, moment_derivative, schmidt_gap


def chain_couplings(mode: str, alpha: float | None, j0: float, n: int):
    return build_couplings(CouplingSpec(N=n, J0=j0, alpha=alpha, mode=mode))


@dataclass
class EquilibriumConfig:
    mode: str = "nearest-neighbor"  # or "algebraic"
    alpha: float | None = None
    j0: float = -1.0
    sizes: tuple[int, ...] = (8, 10, 12, 14, 16, 18)
    scan_window: tuple[float, float] = (0.2, 2.4)
    scan_step: float = 0.05
    grid_halfwidth: float = 0.18
    grid_step: float = 0.01
    refine_step: float = 0.001
    delta_g: float = 1e-3
    collapse_window: tuple[float, float] = (-10.0, 10.0)

    @property
    def zeta(self) -> str:
        return "F" if self.j0 < 0 else "AF"

    def couplings(self, n: int):
        return chain_couplings(self.mode, self.alpha, self.j0, n)


@dataclass
class EquilibriumResult:
    config: EquilibriumConfig
    dataset: fss.ScalingDataset
    crossings: list[fss.CrossingResult]
    gc_fit: fss.CriticalFit
    exponents: fss.ExponentSet | None
    fits: dict = field(default_factory=dict)

    @property
    def g_c(self) -> float:
        return self.gc_fit.g_c


def _binder_rows(spectra: Spectra, n: int, gs: np.ndarray, zeta: str,
                 dataset: fss.ScalingDataset, done: set) -> None:
    for g in np.sort(gs):
        g = float(g)
        if (n, g) in done:
            continue
        m2, m4 = spectra.moments(g, zeta)
        if m2 < 1e-14:
            continue
        b = 0.5 * (3.0 - m4 / m2**2)
        dataset.add(n, g, "binder", b)
        dataset.add(n, g, "m2", m2)
        dataset.add(n, g, "m4", m4)
        done.add((n, g))


def locate_gc(config: EquilibriumConfig, progress=None) -> tuple[fss.ScalingDataset, list, fss.CriticalFit, dict]:
    """Binder curves, pairwise crossings, and the drift-law fit for g_c."""
    zeta = config.zeta
    sizes = sorted(config.sizes)
    spectras = {n: Spectra(config.couplings(n), "even") for n in sizes}
    dataset = fss.ScalingDataset()
    done: set = set()

    # coarse scan on the two smallest sizes to bracket the crossing region
    lo, hi = config.scan_window
    coarse = np.round(np.arange(lo, hi + 1e-12, config.scan_step), 12)
    scan_ds = fss.ScalingDataset()
    scan_done: set = set()
    for n in sizes[:2]:
        _binder_rows(spectras[n], n, coarse, zeta, scan_ds, scan_done)
    try:
        rough = fss.binder_crossing(scan_ds, sizes[0], sizes[1]).g_star
    except (ValueError, KeyError):
        rough = 0.5 * (lo + hi)
    if progress:
        progress(f"coarse crossing estimate g ~ {rough:.3f}")

    # fine grid for every size
    glo = max(rough - config.grid_halfwidth, 1e-6)
    ghi = rough + config.grid_halfwidth
    fine = np.round(np.arange(glo, ghi + 1e-12, config.grid_step), 12)
    for n in sizes:
        _binder_rows(spectras[n], n, fine, zeta, dataset, done)
        if progress:
            progress(f"binder curve N={n} done")

    # pairwise crossings with one refinement pass around each bracket
    crossings = []
    for n1, n2 in combinations(sizes, 2):
        try:
            first = fss.binder_crossing(dataset, n1, n2)
        except ValueError:
            continue
        b = config.grid_step
        extra = np.round(np.arange(first.g_star - b, first.g_star + b + 1e-12, config.refine_step), 12)
        extra = extra[(extra > glo) & (extra < ghi)]
        for n in (n1, n2):
            _binder_rows(spectras[n], n, extra, zeta, dataset, done)
        crossings.append(fss.binder_crossing(dataset, n1, n2))
    if len(crossings) < 4:
        raise RuntimeError(
            f"only {len(crossings)} Binder crossings found; widen the scan window"
        )
    crossings.sort(key=lambda c: c.n1 * c.n2)
    products = [c.n1 * c.n2 for c in crossings]
    stars = [c.g_star for c in crossings]
    fit = fss.fit_gc(products, stars)
    return dataset, crossings, fit, {"spectras": spectras}


def exponents_at_gc(config: EquilibriumConfig, g_c: float, dataset: fss.ScalingDataset,
                    spectras: dict, progress=None) -> tuple[fss.ExponentSet, dict]:
    """Power-law fits of gap, moments, Schmidt gap, and moment derivatives."""
    zeta = config.zeta
    sizes = sorted(config.sizes)
    gaps, m2s, dls, dm2, dm4 = [], [], [], [], []
    for n in sizes:
        sp = spectras[n]
        odd = Spectra(config.couplings(n), "odd")
        gap = energy_gap(None, g_c, even=sp, odd=odd)
        gaps.append(gap.sector_gap)
        gs = sp.ground_state(g_c)
        m2, _ = magnetization_moments(gs.state, zeta)
        m2s.append(m2)
        dls.append(schmidt_gap(gs.state).gap)
        d2 = moment_derivative(None, g_c, zeta, order=2, delta=config.delta_g, spectra=sp)
        d4 = moment_derivative(None, g_c, zeta, order=4, delta=config.delta_g, spectra=sp)
        dm2.append(d2.value)
        dm4.append(d4.value)
        dataset.add(n, g_c, "gap_sector", gap.sector_gap)
        dataset.add(n, g_c, "gap_global", gap.global_gap)
        dataset.add(n, g_c, "schmidt_gap", dls[-1])
        dataset.add(n, g_c, "dm2", d2.value)
        dataset.add(n, g_c, "dm4", d4.value)
        if (n, g_c) not in {(k[0], k[1]) for k in dataset.rows if k[2] == "m2"}:
            m4v = magnetization_moments(gs.state, zeta)[1]
            dataset.add(n, g_c, "m2", m2)
            dataset.add(n, g_c, "m4", m4v)
        if progress:
            progress(f"exponent observables N={n} done")

    ns = np.array(sizes, dtype=float)
    z_fit = fss.powerlaw_fit(ns, np.array(gaps))
    beta_fit = fss.powerlaw_fit(ns, np.sqrt(np.array(m2s)))
    lam_fit = fss.powerlaw_fit(ns, np.array(dls))
    nu_fit = fss.nu_from_moments(ns, np.array(dm2), np.array(dm4))
    nu = nu_fit.nu
    exps = fss.ExponentSet(
        nu=nu,
        z=-z_fit.exponent,
        beta_m=-beta_fit.exponent * nu,
        beta_lambda=-lam_fit.exponent * nu,
        nu_err=nu_fit.nu_err,
        z_err=z_fit.stderr,
        beta_m_err=abs(beta_fit.stderr * nu),
        beta_lambda_err=abs(lam_fit.stderr * nu),
    )
    fits = {
        "z": z_fit,
        "beta_m_over_nu": beta_fit,
        "beta_lambda_over_nu": lam_fit,
        "inv_nu": nu_fit.slope_fit,
    }
    return exps, fits


def equilibrium_analysis(config: EquilibriumConfig, progress=None) -> EquilibriumResult:
    dataset, crossings, gc_fit, ctx = locate_gc(config, progress)
    exps, fits = exponents_at_gc(config, gc_fit.g_c, dataset, ctx["spectras"], progress)
    return EquilibriumResult(config, dataset, crossings, gc_fit, exps, fits)


def equilibrium_collapse(result: EquilibriumResult, name: str, gamma_over_nu: float,
                         perturb: float = 0.0) -> fss.Chi2Result:
    """Chi-squared collapse of one dataset observable with the fitted exponents.

    `perturb` scales (1/nu, gamma/nu) by (1 + perturb) to score degraded
    exponents against the fitted ones.
    """
    nu = result.exponents.nu
    inv_nu = (1.0 / nu) * (1.0 + perturb)
    gon = gamma_over_nu * (1.0 + perturb)
    curves = {}
    for n in result.dataset.sizes(name):
        g, v, _ = result.dataset.curve(name, n)
        x = (g - result.g_c) * float(n) ** inv_nu
        phi = v * float(n) ** gon
        curves[n] = (x, phi)
    return fss.collapse_chi2(curves, window=result.config.collapse_window)
