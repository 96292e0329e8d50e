"""Static observables: order-parameter moments, domain counts, correlators.

Everything here works through the x product basis, where the order
parameters m_F = (1/N) sum_i sigma^x_i and m_AF = (1/N) sum_i (-1)^i
sigma^x_i and the domain counter are all diagonal.  x-basis spin values
are s_i = +1 for bit 0 and -1 for bit 1 (see basis.py).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import StateVector, popcounts, x_basis_transform
from .model import energy_expectation

ZETAS = ("F", "AF")


def _check_zeta(zeta: str) -> None:
    if zeta not in ZETAS:
        raise ValueError(f"zeta must be 'F' or 'AF', got {zeta!r}")


@lru_cache(maxsize=None)
def magnetization_values(n: int, zeta: str) -> np.ndarray:
    """Eigenvalue of m_zeta on each x-basis configuration."""
    _check_zeta(zeta)
    idx = np.arange(1 << n, dtype=np.uint32)
    if zeta == "F":
        # sum_i s_i = n - 2 * popcount
        total = n - 2 * popcounts(n).astype(np.float64)
    else:
        even_mask = np.uint32(sum(1 << i for i in range(0, n, 2)))
        odd_mask = np.uint32(sum(1 << i for i in range(1, n, 2)))
        n_even = (n + 1) // 2
        n_odd = n // 2
        s_even = n_even - 2 * np.bitwise_count(idx & even_mask).astype(np.float64)
        s_odd = n_odd - 2 * np.bitwise_count(idx & odd_mask).astype(np.float64)
        total = s_even - s_odd
    return total / n


@lru_cache(maxsize=None)
def domain_values(n: int, zeta: str) -> np.ndarray:
    """Domain count n_do of each x-basis configuration.

    n_do = (N+1)/2 -+ (1/2) sum_i s_i s_{i+1} (upper sign for F), which is
    1 + (number of misaligned neighbor pairs) in the F channel and
    1 + (number of aligned pairs) in the AF channel.
    """
    _check_zeta(zeta)
    idx = np.arange(1 << n, dtype=np.uint32)
    bond_mask = np.uint32((1 << (n - 1)) - 1)
    walls = np.bitwise_count((idx ^ (idx >> 1)) & bond_mask).astype(np.int64)
    if zeta == "F":
        return 1 + walls
    return n - walls


def domain_count(x_bits: int, n: int, zeta: str) -> int:
    """Domain count of a single x-basis configuration."""
    if not 0 <= x_bits < (1 << n):
        raise ValueError(f"bitstring {x_bits:#x} out of range for n={n}")
    return int(domain_values(n, zeta)[x_bits])


def x_probabilities(state: StateVector) -> np.ndarray:
    amps = x_basis_transform(state)
    return np.abs(amps) ** 2


def domain_expectation(state: StateVector, zeta: str) -> float:
    return float(x_probabilities(state) @ domain_values(state.n, zeta))


def defect_expectation(state: StateVector, zeta: str) -> float:
    """Nearest-neighbor domain-wall count; equals <n_do> - 1 identically."""
    return float(x_probabilities(state) @ (domain_values(state.n, zeta) - 1))


def domain_probabilities(state: StateVector, zeta: str) -> np.ndarray:
    """P(n_do) for n_do = 1..N (index 0 unused, dropped)."""
    probs = np.bincount(
        domain_values(state.n, zeta), weights=x_probabilities(state), minlength=state.n + 1
    )
    return probs[1 : state.n + 1]


def magnetization_moments(state: StateVector, zeta: str) -> tuple[float, float]:
    """(<m_zeta^2>, <m_zeta^4>) computed exactly from the x distribution."""
    m = magnetization_values(state.n, zeta)
    p = x_probabilities(state)
    m2 = float(p @ m**2)
    m4 = float(p @ m**4)
    return m2, m4


def x_correlator(state: StateVector, i: int, j: int, probs: np.ndarray | None = None) -> float:
    """<sigma^x_i sigma^x_j> (i may equal j, giving 1)."""
    if probs is None:
        probs = x_probabilities(state)
    if i == j:
        return 1.0
    idx = np.arange(1 << state.n, dtype=np.uint32)
    differ = ((idx >> i) ^ (idx >> j)) & 1
    return float(probs @ (1.0 - 2.0 * differ.astype(np.float64)))


def x_magnetization(state: StateVector, i: int, probs: np.ndarray | None = None) -> float:
    if probs is None:
        probs = x_probabilities(state)
    idx = np.arange(1 << state.n, dtype=np.uint32)
    bit = (idx >> i) & 1
    return float(probs @ (1.0 - 2.0 * bit.astype(np.float64)))


def correlation_function(state: StateVector, r: int) -> float:
    """Connected correlator C(r) averaged over mid-chain pairs.

    Pairs (i, i+r) are kept when their midpoint lies in the central half of
    the chain, which suppresses open-boundary effects.
    """
    n = state.n
    if not 1 <= r <= n - 1:
        raise ValueError(f"separation r={r} out of range for n={n}")
    probs = x_probabilities(state)
    vals = []
    for i in range(n - r):
        mid = i + r / 2.0
        if n / 4.0 <= mid <= 3.0 * n / 4.0:
            c = x_correlator(state, i, i + r, probs)
            c -= x_magnetization(state, i, probs) * x_magnetization(state, i + r, probs)
            vals.append(c)
    if not vals:  # very short chains: fall back to all pairs
        for i in range(n - r):
            c = x_correlator(state, i, i + r, probs)
            c -= x_magnetization(state, i, probs) * x_magnetization(state, i + r, probs)
            vals.append(c)
    return float(np.mean(vals))


@dataclass(frozen=True)
class CorrelationLength:
    xi: float
    residual: float
    reliable: bool
    note: str = ""


def correlation_length(state: StateVector, r_min: int = 2, r_max: int | None = None) -> CorrelationLength:
    """Exponential fit |C(r)| ~ exp(-r/xi) over r in [r_min, N/2].

    Flagged unreliable when the fitted xi exceeds N/2 (saturated) or the
    correlations are numerically zero (no length scale present).
    """
    n = state.n
    if r_max is None:
        r_max = n // 2
    rs = np.arange(r_min, r_max + 1)
    cs = np.array([abs(correlation_function(state, int(r))) for r in rs])
    if np.all(cs < 1e-12):
        return CorrelationLength(0.0, 0.0, False, "correlations vanish")
    keep = cs > 1e-14
    if keep.sum() < 2:
        return CorrelationLength(0.0, 0.0, False, "too few nonzero correlators")
    slope, intercept = np.polyfit(rs[keep], np.log(cs[keep]), 1)
    resid = float(np.sqrt(np.mean((np.log(cs[keep]) - (slope * rs[keep] + intercept)) ** 2)))
    if slope >= -1e-12:
        return CorrelationLength(np.inf, resid, False, "non-decaying correlations")
    xi = -1.0 / slope
    reliable = xi <= n / 2.0
    note = "" if reliable else "xi exceeds N/2 (saturated)"
    return CorrelationLength(float(xi), resid, reliable, note)


@dataclass(frozen=True)
class ObservableRecord:
    """Bundle of the standard static observables of one state."""

    m2: float
    m4: float
    n_do: float
    energy: float
    nn_correlators: tuple[float, ...]

    def __post_init__(self):
        if self.m4 < self.m2**2 - 1e-10:
            raise ValueError("m4 >= m2^2 violated")


def observable_record(state: StateVector, J, g: float, zeta: str) -> ObservableRecord:
    probs = x_probabilities(state)
    m = magnetization_values(state.n, zeta)
    corr = tuple(x_correlator(state, i, i + 1, probs) for i in range(state.n - 1))
    return ObservableRecord(
        m2=float(probs @ m**2),
        m4=float(probs @ m**4),
        n_do=float(probs @ domain_values(state.n, zeta)),
        energy=energy_expectation(state, J, g),
        nn_correlators=corr,
    )
