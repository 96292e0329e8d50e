"""Linear ion chain in a harmonic trap: positions, modes, spin couplings.

Everything is dimensionless: lengths in the Coulomb trap length
(e^2 / (4 pi eps0 M w_z^2))^(1/3), frequencies in units of the axial trap
frequency.  The mass, wave number and base Rabi frequency of the drive
fold into a single normalization recorded alongside compiled plans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TrapError(RuntimeError):
    pass


def _force_residual(u: np.ndarray) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    inv2 = np.sign(diff) / diff**2
    return u - inv2.sum(axis=1)


def _force_jacobian(u: np.ndarray) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    off = -2.0 / np.abs(diff) ** 3
    jac = -off.copy()
    np.fill_diagonal(jac, 1.0 + off.sum(axis=1))
    return jac


def equilibrium_positions(N: int, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Newton solve of the force balance; sorted, symmetric about zero."""
    if N < 2:
        raise ValueError("need at least two ions")

    def newton(u0):
        u = u0.copy()
        for _ in range(max_iter):
            r = _force_residual(u)
            if np.max(np.abs(r)) < tol:
                return u
            try:
                step = np.linalg.solve(_force_jacobian(u), r)
            except np.linalg.LinAlgError:
                return None
            scale = 1.0
            base = np.max(np.abs(r))
            for _damp in range(30):
                trial = u - scale * step
                if np.all(np.diff(trial) > 0) and np.max(np.abs(_force_residual(trial))) < base:
                    u = trial
                    break
                scale /= 2.0
            else:
                return None
        return None

    # generic seed, then the scaled-linear fallback from the packing estimate
    seeds = [
        np.linspace(-0.5, 0.5, N) * N**0.56,
        np.linspace(-0.5, 0.5, N) * 2.018 * N**0.441,
    ]
    for seed in seeds:
        u = newton(seed)
        if u is not None:
            u = np.sort(u)
            u -= u.mean()  # symmetrize roundoff
            if np.max(np.abs(_force_residual(u))) < 1e-10:
                return u
    raise TrapError(f"Newton iteration for N={N} ion positions diverged for all seeds")


@dataclass(frozen=True)
class ModeData:
    positions: np.ndarray
    frequencies: np.ndarray  # ascending, units of the axial trap frequency
    vectors: np.ndarray  # columns b[:, m], orthonormal

    def __post_init__(self):
        gram = self.vectors.T @ self.vectors
        if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
            raise ValueError("mode vectors are not orthonormal")

    @property
    def com_frequency(self) -> float:
        return float(self.frequencies[0])


def normal_modes(positions: np.ndarray) -> ModeData:
    """Axial normal modes from the dimensionless Hessian at equilibrium."""
    u = np.asarray(positions, dtype=float)
    if np.max(np.abs(_force_residual(u))) > 1e-8:
        raise TrapError("positions do not satisfy the force balance")
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    inv3 = 2.0 / np.abs(diff) ** 3
    hess = -inv3
    np.fill_diagonal(hess, 1.0 + inv3.sum(axis=1))
    evals, evecs = np.linalg.eigh(hess)
    if evals[0] <= 0:
        raise TrapError(f"non-positive-definite Hessian (min eigenvalue {evals[0]:.3e})")
    freqs = np.sqrt(evals)
    # fix a sign convention: center-of-mass component positive
    for m in range(evecs.shape[1]):
        if evecs[:, m].sum() < 0:
            evecs[:, m] = -evecs[:, m]
    return ModeData(u, freqs, evecs)


def effective_couplings(rabi: np.ndarray, mu_l: float, modes: ModeData,
                        guard_factor: float = 10.0) -> np.ndarray:
    """Phonon-mediated couplings J_ij = Omega_i Omega_j sum_m b_im b_jm / (mu^2 - w_m^2).

    The drive must stay outside a guard band around every mode:
    |mu_l - w_m| >= guard_factor * max_i |eta_im Omega_i| with the
    dimensionless Lamb-Dicke factor eta_im = b_im / sqrt(2 w_m).
    """
    rabi = np.asarray(rabi, dtype=float)
    n = rabi.size
    if modes.vectors.shape != (n, n):
        raise ValueError("Rabi vector length does not match the mode data")
    for m in range(n):
        w = modes.frequencies[m]
        eta = modes.vectors[:, m] / np.sqrt(2.0 * w)
        limit = guard_factor * np.max(np.abs(eta * rabi))
        if abs(mu_l - w) < limit:
            raise TrapError(
                f"detuning {mu_l:.6f} inside the guard band of mode {m} "
                f"(w_m={w:.6f}): phonon excitation suppression requires "
                f"|mu - w_m| >> eta_im * Omega_i"
            )
    denom = mu_l**2 - modes.frequencies**2
    weighted = modes.vectors / denom[None, :]
    j = rabi[:, None] * rabi[None, :] * (weighted @ modes.vectors.T)
    np.fill_diagonal(j, 0.0)
    return j


@dataclass(frozen=True)
class RabiAssignment:
    """Per-term drive amplitudes Omega_i = Omega0 sqrt(Lambda_k) (v_k)_i."""

    term: int
    rabi: np.ndarray  # signed; hardware applies |rabi| and masks carry the signs
    omega0: float
    delta: float  # detuning above the center-of-mass frequency
    mu_l: float


def rabi_assignment(lam: float, vec: np.ndarray, modes: ModeData, delta: float,
                    term: int = 0, omega0: float = 1.0) -> RabiAssignment:
    if lam < 0:
        raise ValueError("interaction eigenvalue must be nonnegative")
    rabi = omega0 * np.sqrt(lam) * np.asarray(vec, dtype=float)
    mu_l = modes.com_frequency + delta
    return RabiAssignment(term, rabi, omega0, delta, mu_l)


def term_couplings(assignment: RabiAssignment, modes: ModeData,
                   guard_factor: float = 10.0, normalize: bool = True) -> np.ndarray:
    """Physical couplings of one decomposition term near the COM mode.

    With normalize=True the COM-pole prefactor is divided out so the
    result converges to Lambda_k (v_k)_i (v_k)_j as delta -> 0.
    """
    j = effective_couplings(assignment.rabi, assignment.mu_l, modes, guard_factor)
    if not normalize:
        return j
    n = modes.vectors.shape[0]
    com_pole = 1.0 / (assignment.mu_l**2 - modes.com_frequency**2) / n
    return j / com_pole
