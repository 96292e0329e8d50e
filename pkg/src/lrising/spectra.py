"""Sector-resolved low-lying spectra and the observables built on them.

Ground and first-excited states come from ARPACK Lanczos on the
matrix-free product (dense eigh below dim 600).  A `Spectra` instance
caches eigenpairs per field value and warm-starts neighboring solves,
which is what makes field sweeps and quench-fidelity sampling affordable.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .basis import StateVector
from .model import HamiltonianAction, as_matrix
from .observables import magnetization_moments

DENSE_DIM = 600


class EigensolverError(RuntimeError):
    """Raised when the iterative eigensolver fails to converge."""

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    state: StateVector
    sector: str
    residual: float


@dataclass(frozen=True)
class SpectralGap:
    sector_gap: float
    global_gap: float
    e0: float

    def __post_init__(self):
        if self.sector_gap < -1e-12 or self.global_gap < -1e-12:
            raise ValueError("negative gap")
        if self.global_gap > self.sector_gap + 1e-10:
            raise ValueError("global gap exceeds sector gap")


@dataclass(frozen=True)
class SchmidtData:
    eigenvalues: np.ndarray  # descending
    gap: float

    def __post_init__(self):
        lam = self.eigenvalues
        if abs(float(lam.sum()) - 1.0) > 1e-10:
            raise ValueError("Schmidt spectrum does not sum to one")
        if lam.min() < -1e-12:
            raise ValueError("negative Schmidt eigenvalue")


@dataclass(frozen=True)
class MomentDerivative:
    value: float
    step: float
    check_value: float  # half-step estimate
    rel_dev: float
    converged: bool


class Spectra:
    """Eigenpair provider for one coupling matrix, one sector."""

    def __init__(self, J, sector: str = "even", size_cap: int = 20, cache_size: int = 96):
        self.action = HamiltonianAction(as_matrix(J), sector, size_cap=size_cap)
        self.sector = sector
        self.n = self.action.n
        self._cache: OrderedDict[tuple, tuple] = OrderedDict()
        self._cache_size = cache_size

    def _nearest_cached(self, g: float):
        best, best_dist = None, np.inf
        for (gc, _k), val in self._cache.items():
            d = abs(gc - g)
            if d < best_dist:
                best, best_dist = val, d
        return best

    def _solve(self, g: float, k: int):
        key = (g, k)
        for (gc, kc), val in self._cache.items():
            if gc == g and kc >= k:
                self._cache.move_to_end((gc, kc))
                return val
        dim = self.action.dim
        if dim <= DENSE_DIM:
            h = self.action.dense(g)
            vals, vecs = np.linalg.eigh(h)
            result = (vals[:k].copy(), [vecs[:, i].astype(float) for i in range(k)])
        else:
            op = LinearOperator(
                (dim, dim), matvec=lambda v: self.action.matvec(v, g), dtype=np.float64
            )
            v0 = None
            near = self._nearest_cached(g)
            if near is not None:
                v0 = near[1][0]
            try:
                vals, vecs = eigsh(op, k=k, which="SA", v0=v0, tol=1e-12)
            except ArpackNoConvergence as exc:
                raise EigensolverError(
                    f"eigensolver did not converge at g={g} (k={k}): {exc}",
                    last_estimate=getattr(exc, "eigenvalues", None),
                ) from exc
            order = np.argsort(vals)
            result = (vals[order], [vecs[:, i].astype(float) for i in order])
        self._cache[key] = result
        self._cache.move_to_end(key)
        while len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return result

    def ground_state(self, g: float) -> GroundStateResult:
        vals, vecs = self._solve(g, 1)
        e0, v = float(vals[0]), vecs[0]
        resid = float(np.linalg.norm(self.action.matvec(v, g) - e0 * v))
        state = StateVector(v.astype(complex), self.n, self.sector)
        return GroundStateResult(e0, state, self.sector, resid)

    def lowest_two(self, g: float):
        vals, vecs = self._solve(g, 2)
        return float(vals[0]), float(vals[1]), vecs[0]

    def moments(self, g: float, zeta: str) -> tuple[float, float]:
        gs = self.ground_state(g)
        return magnetization_moments(gs.state, zeta)


def ground_state(J, g: float, sector: str = "even", size_cap: int = 20) -> GroundStateResult:
    return Spectra(J, sector, size_cap=size_cap).ground_state(g)


def energy_gap(J, g: float, size_cap: int = 20,
               even: Spectra | None = None, odd: Spectra | None = None) -> SpectralGap:
    """Gap within the positive-parity sector and across both sectors."""
    even = even or Spectra(J, "even", size_cap=size_cap)
    odd = odd or Spectra(J, "odd", size_cap=size_cap)
    e0e, e1e, _ = even.lowest_two(g)
    e0o, e1o, _ = odd.lowest_two(g)
    levels = sorted([e0e, e1e, e0o, e1o])
    sector_gap = max(e1e - e0e, 0.0)
    global_gap = max(levels[1] - levels[0], 0.0)
    return SpectralGap(sector_gap, min(global_gap, sector_gap), levels[0])


def schmidt_gap(state: StateVector) -> SchmidtData:
    """Half-chain reduced-density-matrix spectrum, descending."""
    n = state.n
    if n % 2:
        raise ValueError("Schmidt bipartition needs even N")
    full = state.to_full().amps
    half = 1 << (n // 2)
    mat = full.reshape(half, half)  # [right block, left block]
    svals = np.linalg.svd(mat, compute_uv=False)
    lam = np.sort(svals**2)[::-1]
    gap = float(lam[0] - lam[1]) if lam.size > 1 else float(lam[0])
    return SchmidtData(lam, gap)


def binder_cumulant(J, g: float, zeta: str, spectra: Spectra | None = None,
                    state: StateVector | None = None) -> float:
    """B = (3 - m4/m2^2) / 2 of the sector ground state (or a given state)."""
    if state is None:
        spectra = spectra or Spectra(J)
        state = spectra.ground_state(g).state
    m2, m4 = magnetization_moments(state, zeta)
    if m2 < 1e-14:
        raise ValueError("m2 below 1e-14: degenerate or invalid input for the cumulant")
    return 0.5 * (3.0 - m4 / m2**2)


def moment_derivative(J, g: float, zeta: str, order: int = 2, delta: float | None = None,
                      spectra: Spectra | None = None) -> MomentDerivative:
    """Centered finite difference of <m_zeta^order> wrt g, Richardson-checked.

    The half-step estimate must agree to 1%; otherwise the result is
    flagged unconverged.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    spectra = spectra or Spectra(J)
    if delta is None:
        delta = 1e-3 * max(abs(g), 1.0)
    if g - delta < 0:
        raise ValueError("stencil leaves the g >= 0 domain")

    def f(gv):
        m2, m4 = spectra.moments(gv, zeta)
        return m2 if order == 2 else m4

    d_full = (f(g + delta) - f(g - delta)) / (2 * delta)
    d_half = (f(g + delta / 2) - f(g - delta / 2)) / delta
    scale = max(abs(d_half), 1e-12)
    rel = abs(d_half - d_full) / scale
    return MomentDerivative(d_full, delta, d_half, rel, rel <= 1e-2)
