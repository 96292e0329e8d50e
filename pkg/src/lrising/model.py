"""Long-range Ising chain in a transverse field.

H(g) = sum_{i<j} J_ij sigma^x_i sigma^x_j + g sum_i sigma^z_i

with J_ij = J0 / |i-j|^alpha (algebraic mode) or J0 on nearest neighbors
only.  J0 = -1 gives ferromagnetic, J0 = +1 antiferromagnetic couplings.
H commutes with the global spin-flip parity, so all products can stay in
one parity sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import (
    StateVector,
    popcounts,
    sector_dim,
    sector_positions,
    sector_states,
)

DEFAULT_SIZE_CAP = 20


@dataclass(frozen=True)
class CouplingSpec:
    """Parameters of the coupling law."""

    N: int
    J0: float
    alpha: float | None = None
    mode: str = "algebraic"
    allow_odd: bool = False  # escape hatch for raw-matrix uses (ion chains, demos)

    def __post_init__(self):
        if self.mode not in ("algebraic", "nearest-neighbor"):
            raise ValueError(f"unknown coupling mode {self.mode!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if self.N % 2 and not self.allow_odd:
            raise ValueError(f"N must be even (got {self.N}); chain analyses assume it")
        if self.J0 == 0:
            raise ValueError("J0 must be nonzero")
        if self.mode == "algebraic":
            if self.alpha is None:
                raise ValueError("algebraic mode needs a decay exponent alpha")
            if self.alpha < 0:
                raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def ferro(self) -> bool:
        return self.J0 < 0

    @property
    def zeta(self) -> str:
        """Order parameter channel matching the coupling sign."""
        return "F" if self.ferro else "AF"


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric pair couplings with zero diagonal."""

    entries: np.ndarray
    spec: CouplingSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        j = self.entries
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.allclose(j, j.T, atol=1e-14):
            raise ValueError("coupling matrix must be symmetric")
        if np.max(np.abs(np.diag(j))) > 1e-14:
            raise ValueError("coupling matrix must have zero diagonal")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def build_couplings(spec: CouplingSpec) -> CouplingMatrix:
    """Evaluate the coupling law into a CouplingMatrix."""
    n = spec.N
    j = np.zeros((n, n))
    if spec.mode == "nearest-neighbor":
        for i in range(n - 1):
            j[i, i + 1] = j[i + 1, i] = spec.J0
    else:
        for i in range(n):
            for k in range(i + 1, n):
                j[i, k] = j[k, i] = spec.J0 / abs(i - k) ** spec.alpha
    return CouplingMatrix(j, spec)


def as_matrix(J) -> np.ndarray:
    if isinstance(J, CouplingMatrix):
        return J.entries
    return np.asarray(J, dtype=float)


def coupling_pairs(J) -> tuple[np.ndarray, np.ndarray]:
    """Flip masks and coupling values of the nonzero pairs (i < j)."""
    j = as_matrix(J)
    n = j.shape[0]
    masks, values = [], []
    for i in range(n):
        for k in range(i + 1, n):
            if j[i, k] != 0.0:
                masks.append((1 << i) | (1 << k))
                values.append(j[i, k])
    return np.asarray(masks, dtype=np.int64), np.asarray(values, dtype=np.float64)


class HamiltonianAction:
    """Matrix-free H(g)|psi> in the full basis or a parity sector.

    The kernel is chosen from the coupling sparsity; dense couplings go
    through the x-diagonal split which costs O(n 2^n) per product.
    Instances are immutable after construction and safe to share.
    """

    def __init__(self, J, sector: str = "even", size_cap: int = DEFAULT_SIZE_CAP):
        j = as_matrix(J)
        self.n = j.shape[0]
        if self.n > size_cap:
            raise ValueError(f"N={self.n} exceeds the configured cap {size_cap}")
        self.sector = sector
        self.masks, self.couplings = coupling_pairs(j)
        self.matrix = j

        pc = popcounts(self.n).astype(np.float64)
        dz_full = 2.0 * pc - self.n
        if sector == "full":
            self.states = sector_states(self.n, "full").astype(np.int64)
            self.pos = None
            self.dz = dz_full
        else:
            self.states = sector_states(self.n, sector).astype(np.int64)
            self.pos = sector_positions(self.n, sector)
            self.dz = dz_full[self.states]

        # split kernel beats pair hopping once couplings are dense
        self._use_split = self.masks.size > max(3 * self.n, 8)
        if self._use_split:
            self._dx = kernels.coupling_x_diagonal(self.n, self.masks, self.couplings)
            self._dz_full = dz_full

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def norm_bound(self, g: float) -> float:
        """Cheap upper bound on the spectral norm of H(g)."""
        return abs(g) * self.n + float(np.sum(np.abs(self.couplings)))

    def matvec(self, v: np.ndarray, g: float) -> np.ndarray:
        v = np.asarray(v)
        if v.dtype != np.complex128 and v.dtype != np.float64:
            v = v.astype(np.complex128 if np.iscomplexobj(v) else np.float64)
        v = np.ascontiguousarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"state dimension {v.shape} does not match {self.dim}")
        out = np.empty_like(v)
        if not self._use_split:
            if self.sector == "full":
                kernels.pair_matvec_full(v, self.dz, self.masks, self.couplings, g, out)
            else:
                kernels.pair_matvec_sector(
                    v, self.dz, self.states, self.pos, self.masks, self.couplings, g, out
                )
            return out
        scratch = np.empty(1 << self.n, dtype=v.dtype)
        if self.sector == "full":
            kernels.split_matvec_full(v, self.dz, self._dx, g, scratch, out)
            return out
        full = np.zeros(1 << self.n, dtype=v.dtype)
        full[self.states] = v
        fout = np.empty_like(full)
        kernels.split_matvec_full(full, self._dz_full, self._dx, g, scratch, fout)
        return fout[self.states]

    def expectation(self, v: np.ndarray, g: float) -> float:
        return float(np.real(np.vdot(v, self.matvec(v, g))))

    def dense(self, g: float) -> np.ndarray:
        """Explicit sector matrix (small dimensions only)."""
        if self.dim > 4096:
            raise ValueError("dense matrix requested for dim > 4096")
        pos = self.pos
        if pos is None:
            pos = np.arange(1 << self.n, dtype=np.int64)
        return kernels.dense_sector_matrix(
            self.n, self.states, pos, self.dz, self.masks, self.couplings, g
        )


def apply_hamiltonian(state: StateVector, J, g: float) -> StateVector:
    """H(g)|psi> in the basis the state lives in."""
    if g < 0:
        raise ValueError("transverse field g must be >= 0")
    j = as_matrix(J)
    if j.shape[0] != state.n:
        raise ValueError(f"coupling matrix is {j.shape[0]} sites, state has {state.n}")
    action = HamiltonianAction(j, state.sector, size_cap=max(state.n, DEFAULT_SIZE_CAP))
    return StateVector(action.matvec(state.amps, g), state.n, state.sector)


def energy_expectation(state: StateVector, J, g: float) -> float:
    action = HamiltonianAction(as_matrix(J), state.sector, size_cap=max(state.n, DEFAULT_SIZE_CAP))
    return action.expectation(state.amps, g)
