"""Computational bases for chains of spin-1/2 sites.

Conventions (fixed; the file formats in `quench.save_checkpoint` rely on them):

* z basis: basis state = integer index, bit i (site 0 = least significant
  bit) set means site i is spin-up (sigma^z = +1).  Index 0 is the fully
  polarized |down...down> state.
* parity sectors: 'even' holds the z states with an even number of up
  spins, 'odd' the rest.  Sector bases are ordered by ascending z index.
* x basis: bit i = 0 means sigma^x = +1 on site i, bit 1 means -1.  The
  single-site change of basis sends z amplitudes (a_down, a_up) to
  ((a_down + a_up)/sqrt2, (a_up - a_down)/sqrt2), so |down> maps to
  (1/sqrt2, -1/sqrt2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SECTORS = ("full", "even", "odd")

NORM_ATOL = 1e-12


@lru_cache(maxsize=None)
def popcounts(n: int) -> np.ndarray:
    """Number of set bits for every index < 2**n (int8)."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.int8)


@lru_cache(maxsize=None)
def sector_states(n: int, sector: str) -> np.ndarray:
    """Ascending z indices belonging to a parity sector (uint32)."""
    if sector == "full":
        return np.arange(1 << n, dtype=np.uint32)
    want = 0 if sector == "even" else 1
    pc = popcounts(n)
    return np.nonzero((pc & 1) == want)[0].astype(np.uint32)


@lru_cache(maxsize=None)
def sector_positions(n: int, sector: str) -> np.ndarray:
    """Full-index -> position in the sector basis (-1 outside)."""
    pos = np.full(1 << n, -1, dtype=np.int64)
    states = sector_states(n, sector)
    pos[states] = np.arange(states.size)
    return pos


def sector_dim(n: int, sector: str) -> int:
    return (1 << n) if sector == "full" else (1 << (n - 1))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the z basis (full) or a parity sub-basis."""

    amps: np.ndarray
    n: int
    sector: str = "full"

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise ValueError(f"unknown sector {self.sector!r}")
        if self.amps.shape != (sector_dim(self.n, self.sector),):
            raise ValueError(
                f"amplitude length {self.amps.shape} does not match "
                f"n={self.n} sector={self.sector}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_normalized(self, atol: float = NORM_ATOL) -> None:
        if abs(self.norm**2 - 1.0) > atol:
            raise ValueError(f"state norm^2 deviates from 1 by {self.norm**2 - 1.0:.3e}")

    def to_full(self) -> "StateVector":
        if self.sector == "full":
            return self
        return StateVector(embed(self.amps, self.n, self.sector), self.n, "full")

    def overlap(self, other: "StateVector") -> complex:
        a, b = self, other
        if a.sector != b.sector:
            a, b = a.to_full(), b.to_full()
        return complex(np.vdot(a.amps, b.amps))


def embed(amps: np.ndarray, n: int, sector: str) -> np.ndarray:
    """Sector amplitudes -> full z-basis amplitudes."""
    full = np.zeros(1 << n, dtype=complex)
    full[sector_states(n, sector)] = amps
    return full


def project(full: np.ndarray, n: int, sector: str) -> np.ndarray:
    """Full z-basis amplitudes -> sector amplitudes (drops the complement)."""
    return np.ascontiguousarray(full[sector_states(n, sector)])


def parity_of(state: StateVector) -> float:
    """Expectation of the spin-flip parity operator."""
    full = state.to_full().amps
    signs = 1.0 - 2.0 * (popcounts(state.n).astype(np.float64) % 2)
    return float(np.real(np.vdot(full, signs * full)))


def product_state(n: int, sector: str = "full", bits: int = 0) -> StateVector:
    """z product state |bits>; bits=0 is the fully polarized |down...down>."""
    if sector == "full":
        amps = np.zeros(1 << n, dtype=complex)
        amps[bits] = 1.0
        return StateVector(amps, n, "full")
    pos = sector_positions(n, sector)[bits]
    if pos < 0:
        raise ValueError(f"state {bits:#x} is not in the {sector} sector")
    amps = np.zeros(sector_dim(n, sector), dtype=complex)
    amps[pos] = 1.0
    return StateVector(amps, n, sector)


def random_state(n: int, sector: str = "full", rng=None) -> StateVector:
    rng = np.random.default_rng(rng)
    dim = sector_dim(n, sector)
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    amps /= np.linalg.norm(amps)
    return StateVector(amps, n, sector)


def x_transform_full(amps: np.ndarray, n: int, inverse: bool = False) -> np.ndarray:
    """Apply the per-site z->x change of basis to full-basis amplitudes.

    Orthogonal, O(n 2^n); inverse=True applies the transpose.
    """
    out = np.array(amps, dtype=complex, copy=True)
    s = 1.0 / np.sqrt(2.0)
    for site in range(n):
        block = 1 << site
        m = out.reshape(-1, 2 * block)
        lo = m[:, :block].copy()  # bit = 0 on this site
        hi = m[:, block:]
        if not inverse:
            # c0 = (a0 + a1)/sqrt2 ; c1 = (a1 - a0)/sqrt2
            m[:, :block] = (lo + hi) * s
            m[:, block:] = (hi - lo) * s
        else:
            # a0 = (c0 - c1)/sqrt2 ; a1 = (c0 + c1)/sqrt2
            m[:, :block] = (lo - hi) * s
            m[:, block:] = (lo + hi) * s
    return out


def x_basis_transform(state: StateVector) -> np.ndarray:
    """Amplitudes of `state` in the sigma^x product basis (full length 2^n)."""
    return x_transform_full(state.to_full().amps, state.n)


def x_spin_values(n: int, site: int) -> np.ndarray:
    """sigma^x value (+-1) of `site` for every x-basis index."""
    bits = (np.arange(1 << n, dtype=np.uint32) >> site) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)
