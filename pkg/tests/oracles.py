"""Independent reference implementations used only by the tests.

These deliberately avoid the package's kernels: the Hamiltonian is built
from explicit Kronecker products, the nearest-neighbor chain is solved by
Jordan-Wigner free fermions, and time evolution is a fixed-step RK4
integration of the Schrodinger equation on the dense matrix.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
# basis index 0 = spin down (sigma^z = -1), matching the package convention
SZ = np.array([[-1.0, 0.0], [0.0, 1.0]])


def site_operator(single: np.ndarray, site: int, n: int) -> sp.csr_matrix:
    """Operator acting on `site` (site 0 = least significant bit)."""
    mat = sp.identity(1, format="csr")
    for k in range(n):
        factor = sp.csr_matrix(single) if k == site else sp.identity(2, format="csr")
        mat = sp.kron(factor, mat, format="csr")  # high bits to the left
    return mat


def dense_hamiltonian(J: np.ndarray, g: float) -> np.ndarray:
    n = J.shape[0]
    h = sp.csr_matrix((2**n, 2**n))
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] != 0.0:
                h = h + J[i, j] * (site_operator(SX, i, n) @ site_operator(SX, j, n))
    for i in range(n):
        h = h + g * site_operator(SZ, i, n)
    return h.toarray()


def sector_indices(n: int, parity: str) -> np.ndarray:
    pc = np.array([bin(i).count("1") for i in range(2**n)])
    want = 0 if parity == "even" else 1
    return np.nonzero(pc % 2 == want)[0]


def dense_sector_hamiltonian(J: np.ndarray, g: float, parity: str) -> np.ndarray:
    h = dense_hamiltonian(J, g)
    idx = sector_indices(J.shape[0], parity)
    return h[np.ix_(idx, idx)]


def sparse_hamiltonian(J: np.ndarray, g: float) -> sp.csr_matrix:
    n = J.shape[0]
    h = sp.csr_matrix((2**n, 2**n))
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] != 0.0:
                h = h + J[i, j] * (site_operator(SX, i, n) @ site_operator(SX, j, n))
    for i in range(n):
        h = h + g * site_operator(SZ, i, n)
    return h.tocsr()


def sparse_sector_hamiltonian(J: np.ndarray, g: float, parity: str) -> sp.csr_matrix:
    h = sparse_hamiltonian(J, g)
    idx = sector_indices(J.shape[0], parity)
    return h[idx][:, idx].tocsr()


def free_fermion_levels(n: int, g: float, j: float = 1.0) -> tuple[float, np.ndarray]:
    """Open-chain transverse Ising via Jordan-Wigner.

    Returns (E0, quasiparticle energies ascending).  Valid for the
    spectrum of H = sum_i J0 sx_i sx_{i+1} + g sum_i sz_i with |J0| = j:
    sign flips of J0 and g are unitary conjugations.
    """
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    for i in range(n):
        a[i, i] = 2.0 * g
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = -j
        b[i, i + 1] = -j
        b[i + 1, i] = j
    lam2 = np.linalg.eigvals((a - b) @ (a + b))
    lam = np.sqrt(np.clip(lam2.real, 0.0, None))
    lam.sort()
    e0 = -0.5 * lam.sum()
    return float(e0), lam


def rk4_evolution(J: np.ndarray, g_of_t, total_time: float, psi0: np.ndarray,
                  dt: float = 1e-4) -> np.ndarray:
    """Fixed-step RK4 on i d psi/dt = H(g(t)) psi with the dense matrix."""
    n = J.shape[0]
    h_x = dense_hamiltonian(J, 0.0)
    h_z = dense_hamiltonian(np.zeros_like(J), 1.0)

    def rhs(t, psi):
        return -1j * (h_x @ psi + g_of_t(t) * (h_z @ psi))

    steps = max(1, int(round(total_time / dt)))
    step = total_time / steps
    psi = psi0.astype(complex).copy()
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, psi)
        k2 = rhs(t + step / 2, psi + step / 2 * k1)
        k3 = rhs(t + step / 2, psi + step / 2 * k2)
        k4 = rhs(t + step, psi + step * k3)
        psi = psi + (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += step
    return psi


def brute_force_moments(full_amps: np.ndarray, n: int, zeta: str) -> tuple[float, float]:
    """<m^2>, <m^4> by expanding every sigma^x string explicitly."""
    signs = np.ones(n) if zeta == "F" else np.array([(-1) ** i for i in range(n)], dtype=float)
    m_op = sp.csr_matrix((2**n, 2**n))
    for i in range(n):
        m_op = m_op + signs[i] * site_operator(SX, i, n)
    m_op = m_op / n
    v1 = m_op @ full_amps
    v2 = m_op @ v1
    m2 = float(np.real(np.vdot(full_amps, m_op @ v1)))
    m4 = float(np.real(np.vdot(v2, v2)))
    return m2, m4
