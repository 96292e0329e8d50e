"""Lanczos approximation of exp(-i dt H) |psi> for Hermitian matrix-free H."""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal


class KrylovError(RuntimeError):
    pass


def expm_applied(matvec, v: np.ndarray, dt: float, tol: float = 1e-12, m_max: int = 90):
    """Return exp(-1j * dt * H) v with H given through `matvec`.

    Lanczos recursion with an a-posteriori error estimate; grows the
    subspace until the estimated truncation error drops below tol * |v|.
    Exact on breakdown (invariant subspace).
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy()
    dim = v.shape[0]
    m_max = min(m_max, dim)
    vecs = [np.asarray(v, dtype=complex) / beta0]
    alphas: list[float] = []
    betas: list[float] = []
    y = None
    for j in range(m_max):
        w = matvec(vecs[j])
        alpha = float(np.real(np.vdot(vecs[j], w)))
        w = w - alpha * vecs[j]
        if j > 0:
            w = w - betas[j - 1] * vecs[j - 1]
        alphas.append(alpha)
        beta = float(np.linalg.norm(w))
        # exp(-i dt T) e1 on the current tridiagonal
        evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
        phase = np.exp(-1j * dt * evals)
        y = evecs @ (phase * evecs[0, :].conj())
        if beta < 1e-13:  # invariant subspace: result exact
            break
        err = abs(dt) * beta * abs(y[-1])
        if err < tol:
            break
        if j == m_max - 1:
            raise KrylovError(
                f"Krylov space exhausted at m={m_max} (error estimate {err:.2e}, tol {tol:.2e})"
            )
        betas.append(beta)
        vecs.append(w / beta)
    out = np.zeros(dim, dtype=complex)
    for j, coeff in enumerate(y):
        out += coeff * vecs[j]
    return beta0 * out
