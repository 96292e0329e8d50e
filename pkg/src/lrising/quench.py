"""Linear quenches across the transition and the scaling observables.

The drive is g(t) = g0 (1 - t/tau_q).  Propagation freezes the
Hamiltonian at the midpoint of each substep and applies the exponential
through a Lanczos subspace; substep sizes are controlled by step-doubling
so that halving the step moves the final fidelity by less than the
integrator tolerance.  Everything runs in the positive-parity sector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .basis import StateVector, product_state
from .krylov import expm_applied
from .model import as_matrix
from .observables import (
    domain_probabilities,
    domain_values,
    magnetization_moments,
    x_probabilities,
)
from .spectra import Spectra
from . import fss


class IntegratorError(RuntimeError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class QuenchProtocol:
    """Linear ramp g(t) = g0 (1 - t / tau_q), t in [0, tau_q]."""

    g0: float
    tau_q: float
    g_c: float = 1.0
    tol: float = 1e-8
    initial_state: str = "ground-state"
    sample_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.tau_q <= 0:
            raise ValueError("tau_q must be positive")
        if self.g0 <= self.g_c:
            raise ValueError("the ramp must start above the critical field (g0 > g_c)")
        if self.initial_state not in ("ground-state", "fully-polarized"):
            raise ValueError(f"unknown initial state {self.initial_state!r}")

    def g(self, t: float) -> float:
        return self.g0 * (1.0 - t / self.tau_q)

    def time_of(self, g: float) -> float:
        return self.tau_q * (1.0 - g / self.g0)

    @property
    def t_c(self) -> float:
        """Time at which the ramp crosses g_c (g(t_c) = g_c)."""
        return self.tau_q * (1.0 - self.g_c / self.g0)

    def samples(self) -> np.ndarray:
        if self.sample_times is not None:
            ts = np.asarray(self.sample_times, dtype=float)
        else:
            ts = np.array([0.0, self.t_c, self.tau_q])
        ts = np.unique(ts)
        if ts[0] < 0 or ts[-1] > self.tau_q * (1 + 1e-12):
            raise ValueError("sample times must lie in [0, tau_q]")
        if ts[0] != 0.0:
            ts = np.concatenate([[0.0], ts])
        return ts


@dataclass
class TrajectoryRecord:
    protocol: QuenchProtocol
    zeta: str | None
    times: np.ndarray
    g_values: np.ndarray
    fidelity: np.ndarray
    p_ex: np.ndarray
    residual_energy: np.ndarray
    energy: np.ndarray
    n_do: np.ndarray
    norms: np.ndarray
    final_state: StateVector
    n_steps: int
    n_rejected: int
    states: list[StateVector] | None = None

    def at(self, t: float, arr: np.ndarray) -> float:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-9 * max(1.0, self.protocol.tau_q):
            raise KeyError(f"time {t} was not sampled")
        return float(arr[idx])


class _Stepper:
    """Adaptive midpoint-frozen propagator with step-doubling control.

    One step costs three exponentials (full step plus two halves); the pair
    is locally extrapolated, which cancels the leading dt^3 term of the
    time-symmetric midpoint map.  The doubling difference est ~ C3 dt^3 is
    mapped onto the extrapolated error ~ C5 dt^5 through a calibration
    ratio kappa = C5/C3, re-measured every few accepted steps by a direct
    half-step validation.
    """

    VALIDATE_EVERY = 16

    def __init__(self, action, protocol, tol_rate):
        self.action = action
        self.protocol = protocol
        self.tol_rate = tol_rate  # error budget per unit time
        self.dt = None
        self.kappa = None  # C5/C3 estimate, units 1/time^2
        self.n_steps = 0
        self.n_rejected = 0
        self._since_validation = 0

    def _exp(self, psi, t0, dt, inner_tol):
        g_mid = self.protocol.g(t0 + dt / 2.0)
        return expm_applied(lambda v: self.action.matvec(v, g_mid), psi, dt, tol=inner_tol)

    def _base_step(self, psi, t, dt, inner):
        """Extrapolated midpoint step; returns (psi_out, doubling estimate)."""
        coarse = self._exp(psi, t, dt, inner)
        half = self._exp(psi, t, dt / 2.0, inner)
        fine = self._exp(half, t + dt / 2.0, dt / 2.0, inner)
        est3 = float(np.linalg.norm(coarse - fine))
        return fine + (fine - coarse) / 3.0, est3

    def advance(self, psi, t, t_end):
        if t_end <= t:
            return psi, t_end
        if self.dt is None:
            self.dt = (t_end - t) / 8.0
        tiny = 1e-13 * self.protocol.tau_q
        while t < t_end - 1e-15 * self.protocol.tau_q:
            # keep the Krylov phase span per exponential moderate
            dt_cap = 45.0 / max(self.action.norm_bound(self.protocol.g(t)), 1e-12)
            dt = min(self.dt, dt_cap, t_end - t)
            budget = max(self.tol_rate * dt, 1e-15)
            inner = budget * 0.05
            out, est3 = self._base_step(psi, t, dt, inner)
            validate = self.kappa is None or self._since_validation >= self.VALIDATE_EVERY
            if validate:
                mid1, _ = self._base_step(psi, t, dt / 2.0, inner)
                ref, _ = self._base_step(mid1, t + dt / 2.0, dt / 2.0, inner)
                err_true = float(np.linalg.norm(out - ref)) / (1.0 - 2.0**-4)
                if est3 > 1e-14:
                    kappa_new = err_true / (est3 * dt * dt)
                    self.kappa = kappa_new if self.kappa is None else float(
                        np.sqrt(self.kappa * kappa_new)
                    )
                    self.kappa = min(max(self.kappa, 1e-6), 1e12)
                err = err_true
                self._since_validation = 0
            else:
                err = est3 * self.kappa * dt * dt
                self._since_validation += 1
            if err <= budget or dt <= tiny:
                psi = out
                t = t + dt
                self.n_steps += 1
                grow = 0.85 * (budget / max(err, 1e-300)) ** (1.0 / 5.0)
                self.dt = dt * min(max(grow, 0.3), 3.0)
            else:
                self.n_rejected += 1
                self._since_validation = self.VALIDATE_EVERY  # re-validate after reject
                shrink = 0.85 * (budget / err) ** (1.0 / 5.0)
                self.dt = dt * min(max(shrink, 0.1), 0.9)
                if self.n_rejected > 100000:
                    raise IntegratorError(
                        "step controller cannot meet tolerance", achieved=err
                    )
        return psi, t_end


def _initial_state(protocol, spectra, sector, n):
    if protocol.initial_state == "ground-state":
        return spectra.ground_state(protocol.g0).state.amps.astype(complex)
    return product_state(n, sector, bits=0).amps.copy()


def evolve(J, protocol: QuenchProtocol, *, zeta: str | None = None, sector: str = "even",
           spectra: Spectra | None = None,
           observables: tuple[str, ...] = ("fidelity", "residual_energy", "energy", "domains"),
           store_states: bool = False, size_cap: int = 20) -> TrajectoryRecord:
    """Integrate the ramp and record observables at the protocol samples."""
    j = as_matrix(J)
    need_gs = "fidelity" in observables or "residual_energy" in observables
    if spectra is None:
        spectra = Spectra(j, sector, size_cap=size_cap)
    action = spectra.action
    n = action.n
    if "domains" in observables and zeta is None:
        raise ValueError("domain observables need zeta ('F' or 'AF')")

    psi = _initial_state(protocol, spectra, sector, n)
    ts = protocol.samples()
    stepper = _Stepper(action, protocol, tol_rate=protocol.tol / protocol.tau_q * 0.5)

    m = ts.size
    fid = np.full(m, np.nan)
    pex = np.full(m, np.nan)
    er = np.full(m, np.nan)
    en = np.full(m, np.nan)
    ndo = np.full(m, np.nan)
    norms = np.full(m, np.nan)
    states = [] if store_states else None

    t = 0.0
    for k, t_sample in enumerate(ts):
        if t_sample > t:
            psi, t = stepper.advance(psi, t, float(t_sample))
        g = protocol.g(float(t_sample))
        norms[k] = np.linalg.norm(psi)
        if need_gs:
            gs = spectra.ground_state(g)
            if "fidelity" in observables:
                fid[k] = abs(np.vdot(gs.state.amps, psi)) ** 2
                pex[k] = 1.0 - fid[k]
            if "residual_energy" in observables or "energy" in observables:
                en[k] = float(np.real(np.vdot(psi, action.matvec(psi, g))))
                er[k] = en[k] - gs.energy
        elif "energy" in observables:
            en[k] = float(np.real(np.vdot(psi, action.matvec(psi, g))))
        if "domains" in observables:
            sv = StateVector(psi.copy(), n, sector)
            ndo[k] = float(x_probabilities(sv) @ domain_values(n, zeta))
        if store_states:
            states.append(StateVector(psi.copy(), n, sector))

    return TrajectoryRecord(
        protocol=protocol,
        zeta=zeta,
        times=ts,
        g_values=np.array([protocol.g(float(t)) for t in ts]),
        fidelity=fid,
        p_ex=pex,
        residual_energy=er,
        energy=en,
        n_do=ndo,
        norms=norms,
        final_state=StateVector(psi, n, sector),
        n_steps=stepper.n_steps,
        n_rejected=stepper.n_rejected,
        states=states,
    )


def excitation_probability(state: StateVector, J, g: float, spectra: Spectra | None = None) -> float:
    spectra = spectra or Spectra(as_matrix(J), state.sector)
    gs = spectra.ground_state(g)
    return 1.0 - abs(gs.state.overlap(state)) ** 2


def residual_energy(state: StateVector, J, g: float, spectra: Spectra | None = None) -> float:
    spectra = spectra or Spectra(as_matrix(J), state.sector)
    gs = spectra.ground_state(g)
    e = float(np.real(np.vdot(state.amps, spectra.action.matvec(state.amps, g))))
    return e - gs.energy


def residual_observable(state: StateVector, J, g: float, observable, spectra: Spectra | None = None) -> float:
    """|<psi|S|psi> - <phi0(g)|S|phi0(g)>| for an operator with critical behavior.

    `observable` is 'm2_F', 'm2_AF', 'energy', or a callable state -> value.
    """
    spectra = spectra or Spectra(as_matrix(J), state.sector)
    gs = spectra.ground_state(g)
    if observable == "energy":
        return abs(residual_energy(state, J, g, spectra))
    if isinstance(observable, str):
        if observable not in ("m2_F", "m2_AF"):
            raise ValueError(f"unknown observable {observable!r}")
        zeta = observable.split("_")[1]
        val = magnetization_moments(state, zeta)[0]
        ref = magnetization_moments(gs.state, zeta)[0]
        return abs(val - ref)
    return abs(observable(state) - observable(gs.state))


# ---------------------------------------------------------------------------
# adiabatic-impulse transition


@dataclass(frozen=True)
class AITransition:
    crossed: bool
    theta: float
    t_theta: float = np.nan
    g_tilde: float = np.nan
    note: str = ""


def ai_transition(traj: TrajectoryRecord, theta: float) -> AITransition:
    """First crossing of the instantaneous fidelity below theta."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    f = traj.fidelity
    if np.any(np.isnan(f)):
        raise ValueError("trajectory carries no complete fidelity samples")
    below = np.nonzero(f < theta)[0]
    if below.size == 0:
        return AITransition(False, theta, note="adiabatic run: fidelity never crossed theta")
    k = int(below[0])
    if k == 0:
        t_theta = float(traj.times[0])
    else:
        t0, t1 = traj.times[k - 1], traj.times[k]
        f0, f1 = f[k - 1], f[k]
        t_theta = float(t0 + (theta - f0) * (t1 - t0) / (f1 - f0))
    return AITransition(True, theta, t_theta, traj.protocol.g(t_theta))


def ai_transition_refined(J, protocol: QuenchProtocol, theta: float, *,
                          spectra: Spectra | None = None, sector: str = "even",
                          coarse_points: int = 140, refine_factor: int = 30) -> AITransition:
    """Locate the fidelity crossing with two-stage sampling.

    Stage one walks a fixed grid of field values (shared across quench
    rates so eigenpairs are reused); stage two re-integrates the bracket
    with `refine_factor` subsamples, which puts the sample spacing at
    tau_q / (coarse_points * refine_factor) near the crossing.
    """
    j = as_matrix(J)
    spectra = spectra or Spectra(j, sector)
    action = spectra.action
    g_grid = np.linspace(protocol.g0, 0.0, coarse_points + 1)
    times = np.array([protocol.time_of(g) for g in g_grid])
    stepper = _Stepper(action, protocol, tol_rate=protocol.tol / protocol.tau_q * 0.5)

    psi = _initial_state(protocol, spectra, sector, action.n)

    def fidelity(p, g):
        gs = spectra.ground_state(g)
        return abs(np.vdot(gs.state.amps, p)) ** 2

    t = 0.0
    f_prev = fidelity(psi, protocol.g0)
    if f_prev < theta:
        return AITransition(True, theta, 0.0, protocol.g0, note="initial state already below theta")
    psi_prev, t_prev = psi.copy(), 0.0
    crossed_bracket = None
    for k in range(1, times.size):
        psi, t = stepper.advance(psi, t, float(times[k]))
        f = fidelity(psi, float(g_grid[k]))
        if f < theta:
            crossed_bracket = (t_prev, float(times[k]), psi_prev, f_prev)
            break
        psi_prev, t_prev, f_prev = psi.copy(), t, f
    if crossed_bracket is None:
        return AITransition(False, theta, note="adiabatic run: fidelity never crossed theta")

    t0, t1, psi, f0 = crossed_bracket
    fine_times = np.linspace(t0, t1, refine_factor + 1)
    stepper_fine = _Stepper(action, protocol, tol_rate=protocol.tol / protocol.tau_q * 0.5)
    t = t0
    prev_t, prev_f = t0, f0
    for tf in fine_times[1:]:
        psi, t = stepper_fine.advance(psi, t, float(tf))
        f = fidelity(psi, protocol.g(float(tf)))
        if f < theta:
            t_theta = prev_t + (theta - prev_f) * (t - prev_t) / (f - prev_f)
            return AITransition(True, theta, float(t_theta), protocol.g(float(t_theta)))
        prev_t, prev_f = t, f
    # crossing sits inside the last subinterval border; use the bracket edge
    return AITransition(True, theta, float(t1), protocol.g(float(t1)),
                        note="crossing localized only to the refined grid edge")


@dataclass
class AIScalingResult:
    taus: np.ndarray
    g_tilde: np.ndarray
    theta: float
    g_c: float
    fit: "fss.PowerlawFit"


def ai_scaling(J, g0: float, g_c: float, tau_grid, theta: float, *,
               window: tuple[float, float] = (1.0, 10.0), tol: float = 1e-6,
               spectra: Spectra | None = None, sector: str = "even",
               initial_state: str = "ground-state",
               progress=None) -> AIScalingResult:
    """|g_tilde - g_c| vs tau_q and its power-law exponent over `window`."""
    j = as_matrix(J)
    spectra = spectra or Spectra(j, sector)
    taus = np.sort(np.asarray(tau_grid, dtype=float))
    gts = []
    for tau in taus:
        proto = QuenchProtocol(g0=g0, tau_q=float(tau), g_c=g_c, tol=tol,
                               initial_state=initial_state)
        res = ai_transition_refined(j, proto, theta, spectra=spectra, sector=sector)
        if not res.crossed:
            gts.append(np.nan)
        else:
            gts.append(res.g_tilde)
        if progress is not None:
            progress(tau, gts[-1])
    gts = np.asarray(gts)
    ok = ~np.isnan(gts)
    fit = fss.powerlaw_fit(taus[ok], np.abs(gts[ok] - g_c), window=window)
    return AIScalingResult(taus, gts, theta, g_c, fit)


# ---------------------------------------------------------------------------
# Kibble-Zurek sweeps


@dataclass(frozen=True)
class QuenchPoint:
    tau_q: float
    p_ex_tc: float
    e_r_tc: float
    n_do_end: float
    p_ex_end: float
    e_r_end: float
    energy_end: float


def kz_sweep(J, g0: float, g_c: float, tau_grid, zeta: str, *, tol: float = 1e-6,
             initial_state: str = "ground-state", sector: str = "even",
             spectra: Spectra | None = None, size_cap: int = 20,
             keep_final: bool = False, progress=None):
    """Quench the chain for each tau_q and collect the scaling quantities."""
    j = as_matrix(J)
    spectra = spectra or Spectra(j, sector, size_cap=size_cap)
    taus = np.sort(np.asarray(tau_grid, dtype=float))
    points, finals = [], []
    for tau in taus:
        proto = QuenchProtocol(g0=g0, tau_q=float(tau), g_c=g_c, tol=tol,
                               initial_state=initial_state)
        traj = evolve(j, proto, zeta=zeta, sector=sector, spectra=spectra)
        point = QuenchPoint(
            tau_q=float(tau),
            p_ex_tc=traj.at(proto.t_c, traj.p_ex),
            e_r_tc=traj.at(proto.t_c, traj.residual_energy),
            n_do_end=traj.at(proto.tau_q, traj.n_do),
            p_ex_end=traj.at(proto.tau_q, traj.p_ex),
            e_r_end=traj.at(proto.tau_q, traj.residual_energy),
            energy_end=traj.at(proto.tau_q, traj.energy),
        )
        points.append(point)
        if keep_final:
            finals.append(traj.final_state)
        if progress is not None:
            progress(point)
    return (points, finals) if keep_final else points


KZ_QUANTITIES = {
    "n_do": lambda p: p.n_do_end,
    "p_ex_tc": lambda p: p.p_ex_tc,
    "e_r_tc": lambda p: p.e_r_tc,
    "p_ex_end": lambda p: p.p_ex_end,
    "e_r_end": lambda p: p.e_r_end,
}


@dataclass(frozen=True)
class KZFit:
    quantity: str
    fit: "fss.PowerlawFit"
    plateau_flag: bool


def kz_fit(points, quantity: str, window: tuple[float, float] = (5.0, 50.0)) -> KZFit:
    """Power-law exponent of one sweep quantity over the fit window.

    Windows reaching into the adiabatic plateau (<n_do> ~ 1) are flagged.
    """
    if quantity not in KZ_QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    taus = np.array([p.tau_q for p in points])
    ys = np.array([KZ_QUANTITIES[quantity](p) for p in points])
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau_q values must be strictly increasing")
    in_win = (taus >= window[0]) & (taus <= window[1])
    ndo = np.array([p.n_do_end for p in points])
    plateau = bool(np.any(ndo[in_win] <= 1.05))
    fit = fss.powerlaw_fit(taus, ys, window=window)
    return KZFit(quantity, fit, plateau)


def theoretical_mu(nu: float, z: float, quantity: str, d: int = 1) -> float:
    """QKZ exponent prediction for the supported quantities."""
    if quantity in ("n_do", "p_ex_tc", "p_ex_end", "e_r_end", "g_tilde"):
        base = -d * nu / (z * nu + 1.0)
        if quantity == "g_tilde":
            return -1.0 / (z * nu + 1.0)
        return base
    if quantity == "e_r_tc":
        return -(d + z) * nu / (z * nu + 1.0)
    raise ValueError(f"unknown quantity {quantity!r}")


# ---------------------------------------------------------------------------
# domain statistics


@dataclass(frozen=True)
class DomainDistribution:
    probabilities: np.ndarray  # P(n_do), n_do = 1..N
    mean: float
    variance: float
    gaussian_residual: float
    exponential_rate: float
    exponential_residual: float

    def __post_init__(self):
        p = self.probabilities
        if abs(float(p.sum()) - 1.0) > 1e-10:
            raise ValueError("domain distribution does not sum to one")
        if p.min() < -1e-12:
            raise ValueError("negative probability")


def domain_distribution(state: StateVector, zeta: str) -> DomainDistribution:
    """Exact P(n_do) plus moment-matched Gaussian and exponential fits.

    The Gaussian uses the distribution's own mean/variance (normalized on
    the support); the exponential P ~ exp(-c n) is a least-squares fit in
    log space.  Residuals are sums of squared probability differences.
    """
    probs = domain_probabilities(state, zeta)
    n = probs.size
    ns = np.arange(1, n + 1, dtype=float)
    mean = float(probs @ ns)
    var = float(probs @ (ns - mean) ** 2)

    if var > 1e-12:
        gauss = np.exp(-((ns - mean) ** 2) / (2 * var))
    else:
        gauss = (np.abs(ns - mean) < 0.5).astype(float)
    gauss /= gauss.sum()
    g_resid = float(np.sum((probs - gauss) ** 2))

    support = probs > 1e-12
    if support.sum() >= 2:
        slope, intercept = np.polyfit(ns[support], np.log(probs[support]), 1)
        expo = np.exp(intercept + slope * ns)
        expo /= expo.sum()
        e_resid = float(np.sum((probs - expo) ** 2))
        rate = -float(slope)
    else:
        rate, e_resid = np.inf, float(np.sum(probs**2))
    return DomainDistribution(probs, mean, var, g_resid, rate, e_resid)


# ---------------------------------------------------------------------------
# non-equilibrium finite-size collapse

INTENSIVE_SCALE_POWERS = {
    # gamma/nu exponent of N multiplying the quantity in the collapse
    "e_r_tc": lambda nu, z, d: d + z,
    "p_ex_tc": lambda nu, z, d: 0.0,
}


@dataclass
class NoneqCollapse:
    quantity: str
    nu: float
    z: float
    curves: dict  # N -> (y, phi)
    chi2: float

    def slopes(self, small_fraction: float = 0.35, large_fraction: float = 0.35,
               tau_min: float = 1.0):
        """Power-law slopes of the pooled scaling function at both ends in y."""
        ys, phis, taus = [], [], []
        for n, (y, phi, tau) in self.curves.items():
            ys.append(y)
            phis.append(phi)
            taus.append(tau)
        y = np.concatenate(ys)
        phi = np.concatenate(phis)
        tau = np.concatenate(taus)
        order = np.argsort(y)
        y, phi, tau = y[order], phi[order], tau[order]
        keep = tau >= tau_min  # sudden-ramp points do not follow the scaling form
        y, phi = y[keep], phi[keep]
        k_small = max(3, int(small_fraction * y.size))
        k_large = max(3, int(large_fraction * y.size))
        small = fss.powerlaw_fit(y[:k_small], phi[:k_small])
        large = fss.powerlaw_fit(y[-k_large:], phi[-k_large:])
        return small, large


def noneq_collapse(points_by_size: dict, nu: float, z: float, quantity: str,
                   d: int = 1) -> NoneqCollapse:
    """Collapse S * N^(gamma/nu) against y = tau_q * N^(-(z nu + 1)/nu).

    Only intensive quantities are accepted; residual energy enters as
    e_r = E_r / N through the 'e_r_tc' channel.
    """
    if quantity not in INTENSIVE_SCALE_POWERS:
        raise ValueError(
            f"quantity {quantity!r} is not registered as intensive; "
            f"known: {sorted(INTENSIVE_SCALE_POWERS)}"
        )
    power = INTENSIVE_SCALE_POWERS[quantity](nu, z, d)
    curves = {}
    for n, points in points_by_size.items():
        taus = np.array([p.tau_q for p in points])
        if quantity == "e_r_tc":
            vals = np.array([p.e_r_tc / n for p in points])
        else:
            vals = np.array([KZ_QUANTITIES[quantity](p) for p in points])
        y = taus * float(n) ** (-(z * nu + 1.0) / nu)
        phi = vals * float(n) ** power
        curves[n] = (y, phi, taus)
    chi_curves = {n: (np.log10(y), phi) for n, (y, phi, _t) in curves.items()}
    chi2 = fss.collapse_chi2(chi_curves, window=None).chi2
    return NoneqCollapse(quantity, nu, z, curves, chi2)


# ---------------------------------------------------------------------------
# binary checkpoints

_SECTOR_CODES = {"full": 0, "even": 1, "odd": 2}
_SECTOR_NAMES = {v: k for k, v in _SECTOR_CODES.items()}


def save_checkpoint(path, state: StateVector) -> None:
    """Little-endian layout: int32 N, int32 sector code, int64 count, complex128 data."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<iiq", state.n, _SECTOR_CODES[state.sector], state.amps.size))
        fh.write(np.ascontiguousarray(state.amps, dtype="<c16").tobytes())


def load_checkpoint(path) -> StateVector:
    with open(path, "rb") as fh:
        n, code, count = struct.unpack("<iiq", fh.read(16))
        amps = np.frombuffer(fh.read(16 * count), dtype="<c16").astype(complex)
    return StateVector(amps, n, _SECTOR_NAMES[code])
