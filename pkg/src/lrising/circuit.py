"""Digital gate plans for the Ising ramp on trapped-ion hardware.

The coupling matrix is shifted to K = J + w*1 (positive semidefinite,
smallest eigenvalue zero) and eigendecomposed; each eigenpair becomes a
globally driven interaction term plus single-site sign masks.  Per Trotter
step the drive is frozen at the midpoint field and the terms are applied
in sequence, with adjacent masks collapsed.

Interaction layers are the physically applied gates: their couplings are
the magnitudes Lambda_k |v_i| |v_j|; the surrounding sigma^z masks restore
the signs (conjugation flips the coupling sign on mixed pairs).  The
stored eigenvector keeps its signs for traceability.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import StateVector
from .krylov import expm_applied
from .model import HamiltonianAction, as_matrix


@dataclass(frozen=True)
class KDecomposition:
    shift: float
    eigenvalues: np.ndarray  # kept terms, decreasing
    vectors: np.ndarray  # matching columns
    dropped: tuple[float, ...]  # eigenvalues removed as numerically zero
    matrix: np.ndarray  # K itself
    minimal_shift: bool = True

    def __post_init__(self):
        if np.any(self.eigenvalues < -1e-10):
            raise ValueError("negative interaction eigenvalue")
        if self.minimal_shift:
            evals = np.linalg.eigvalsh(self.matrix)
            if abs(evals[0]) > 1e-10 * max(1.0, abs(evals[-1])):
                raise ValueError("smallest eigenvalue of K deviates from zero")
        recon = (self.vectors * self.eigenvalues) @ self.vectors.T
        off = recon - np.diag(np.diag(recon))
        target = self.matrix - np.diag(np.diag(self.matrix))
        if np.max(np.abs(off - target)) > 1e-9 * max(1.0, np.max(np.abs(target))):
            raise ValueError("kept eigenpairs do not reconstruct the couplings")

    @property
    def n_terms(self) -> int:
        return int(self.eigenvalues.size)


def build_k_decomposition(J, shift: float | None = None,
                          drop_tol: float = 1e-10) -> KDecomposition:
    """Shift J positive semidefinite and keep the nonzero eigenpairs.

    `shift` defaults to -lambda_min(J); larger values are allowed (the
    diagonal has no physical effect) and simply keep more terms.
    """
    j = as_matrix(J)
    if np.max(np.abs(np.diag(j))) > 1e-14:
        raise ValueError("coupling matrix must have zero diagonal")
    evals_j = np.linalg.eigvalsh(j)
    minimal = shift is None
    w = -float(evals_j[0]) if minimal else float(shift)
    k = j + w * np.eye(j.shape[0])
    evals, evecs = np.linalg.eigh(k)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    lam_max = max(float(evals[0]), 1e-300)
    keep = np.abs(evals) > drop_tol * lam_max
    dropped = tuple(float(v) for v in evals[~keep])
    evals, evecs = evals[keep].copy(), evecs[:, keep].copy()
    for m in range(evecs.shape[1]):  # deterministic sign: largest entry positive
        i = int(np.argmax(np.abs(evecs[:, m])))
        if evecs[i, m] < 0:
            evecs[:, m] = -evecs[:, m]
    return KDecomposition(w, np.maximum(evals, 0.0), evecs, dropped, k, minimal)


def sign_mask(vec: np.ndarray) -> int:
    """Bitmask of the sites where the eigenvector entry is negative."""
    mask = 0
    for i, v in enumerate(vec):
        if v < 0:
            mask |= 1 << i
    return mask


@dataclass(frozen=True)
class MaskLayer:
    bits: int


@dataclass(frozen=True)
class InteractionLayer:
    k: int
    lam: float
    vec: tuple[float, ...]  # signed eigenvector
    g_mid: float
    dt: float


Layer = MaskLayer | InteractionLayer


@dataclass
class CircuitPlan:
    n: int
    dt: float
    steps: list[list[Layer]]
    prelude: MaskLayer | None = None
    normalization: float = 1.0
    phase_offset: float = 0.0  # per-step constant phase of the gate convention
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def layer_counts(self) -> list[int]:
        return [len(s) for s in self.steps]

    def to_json(self) -> str:
        def enc(layer):
            if isinstance(layer, MaskLayer):
                return {"type": "mask", "bits": layer.bits}
            return {
                "type": "interaction",
                "k": layer.k,
                "lambda": layer.lam,
                "v": list(layer.vec),
                "g_mid": layer.g_mid,
            }

        payload = {
            "header": {
                "N": self.n,
                "alpha": self.meta.get("alpha"),
                "J0": self.meta.get("J0"),
                "dt": self.dt,
                "steps": self.n_steps,
                "normalization": self.normalization,
                "phase_offset": self.phase_offset,
            },
            "prelude": [enc(self.prelude)] if self.prelude else [],
            "steps": [[enc(layer) for layer in step] for step in self.steps],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CircuitPlan":
        payload = json.loads(text)
        head = payload["header"]

        def dec(obj):
            if obj["type"] == "mask":
                return MaskLayer(int(obj["bits"]))
            return InteractionLayer(int(obj["k"]), float(obj["lambda"]),
                                    tuple(obj["v"]), float(obj["g_mid"]), float(head["dt"]))

        prelude = [dec(o) for o in payload.get("prelude", [])]
        plan = cls(
            n=int(head["N"]),
            dt=float(head["dt"]),
            steps=[[dec(o) for o in step] for step in payload["steps"]],
            prelude=prelude[0] if prelude else None,
            normalization=float(head.get("normalization", 1.0)),
            phase_offset=float(head.get("phase_offset", 0.0)),
            meta={"alpha": head.get("alpha"), "J0": head.get("J0")},
        )
        return plan


def compile_evolution(J, schedule, tau_q: float, dt: float,
                      decomposition: KDecomposition | None = None,
                      meta: dict | None = None) -> CircuitPlan:
    """Compile the ramp into mask/interaction layers (midpoint-frozen field).

    `schedule` maps time -> field strength; tau_q / dt is rounded to an
    integer step count with a warning when it is not one already.
    """
    j = as_matrix(J)
    n = j.shape[0]
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, round(tau_q / dt))
    if abs(n_steps * dt - tau_q) > 1e-9 * tau_q:
        warnings.warn(
            f"tau_q/dt = {tau_q / dt:.6f} is not integral; using {n_steps} steps",
            stacklevel=2,
        )
    dec = decomposition or build_k_decomposition(j)
    q = dec.n_terms
    masks = [sign_mask(dec.vectors[:, k]) for k in range(q)]

    steps: list[list[Layer]] = []
    for l in range(n_steps):
        g_mid = float(schedule(l * dt + dt / 2.0))
        layers: list[Layer] = []
        for k in range(q):
            layers.append(InteractionLayer(
                k=k, lam=float(dec.eigenvalues[k]),
                vec=tuple(dec.vectors[:, k]), g_mid=g_mid, dt=dt,
            ))
            if k < q - 1:
                bits = masks[k] ^ masks[k + 1]
            elif l < n_steps - 1:
                bits = masks[q - 1] ^ masks[0]  # trailing mask absorbs the next prelude
            else:
                bits = masks[q - 1]
            if bits:
                layers.append(MaskLayer(bits))
        steps.append(layers)

    prelude = MaskLayer(masks[0]) if masks[0] else None
    plan = CircuitPlan(n=n, dt=dt, steps=steps, prelude=prelude, meta=meta or {})
    return plan


def _term_action(layer: InteractionLayer, n: int, sector: str) -> HamiltonianAction:
    vec = np.abs(np.asarray(layer.vec))
    coupling = layer.lam * np.outer(vec, vec)
    np.fill_diagonal(coupling, 0.0)
    return HamiltonianAction(coupling, sector, size_cap=max(n, 20))


def simulate_plan(plan: CircuitPlan, psi0: StateVector, tol: float = 1e-12) -> StateVector:
    """Apply every layer exactly (Krylov exponentials + diagonal sign flips)."""
    if psi0.n != plan.n:
        raise ValueError("state size does not match the plan")
    sector = psi0.sector
    actions: dict[int, HamiltonianAction] = {}
    states = None
    psi = psi0.amps.astype(complex).copy()

    def apply_mask(v, bits):
        nonlocal states
        if states is None:
            from .basis import sector_states

            states = sector_states(plan.n, sector).astype(np.int64)
        out = np.empty_like(v)
        kernels.mask_sign_flip(v, states, np.int64(bits), out)
        return out

    if plan.prelude is not None:
        psi = apply_mask(psi, plan.prelude.bits)
    for step in plan.steps:
        n_inter = sum(isinstance(l, InteractionLayer) for l in step)
        for layer in step:
            if isinstance(layer, MaskLayer):
                psi = apply_mask(psi, layer.bits)
                continue
            if layer.k not in actions:
                actions[layer.k] = _term_action(layer, plan.n, sector)
            act = actions[layer.k]
            g_share = layer.g_mid / n_inter
            psi = expm_applied(lambda v: act.matvec(v, g_share), psi, layer.dt, tol=tol)
    return StateVector(psi, plan.n, sector)


def exact_step(J, g_mid: float, dt: float, psi: StateVector, tol: float = 1e-13) -> StateVector:
    """Un-Trotterized midpoint-frozen step, for per-step error measurements."""
    action = HamiltonianAction(as_matrix(J), psi.sector, size_cap=max(psi.n, 20))
    out = expm_applied(lambda v: action.matvec(v, g_mid), psi.amps.astype(complex), dt, tol=tol)
    return StateVector(out, psi.n, psi.sector)


def trotter_step_error(J, schedule, dt: float, psi: StateVector, t0: float = 0.0) -> float:
    """Two-norm error of one compiled step against the un-Trotterized step."""
    plan = compile_evolution(J, schedule, tau_q=dt, dt=dt)
    approx = simulate_plan(plan, psi)
    g_mid = float(schedule(t0 + dt / 2.0))
    exact = exact_step(J, g_mid, dt, psi)
    return float(np.linalg.norm(approx.to_full().amps - exact.to_full().amps))


@dataclass(frozen=True)
class PlanVerification:
    fidelity_deficit: float
    norm_error: float
    dt: float
    steps: int


def verify_plan(plan: CircuitPlan, J, protocol, sector: str = "even") -> PlanVerification:
    """Compare the compiled circuit against the exact ramp evolution.

    Both sides start from the initial state the protocol prescribes; pass a
    protocol with a tight integrator tolerance so the reference dominates.
    The norm error is phase-aligned (global phase removed).
    """
    from .quench import evolve, _initial_state  # local import to avoid a cycle
    from .spectra import Spectra

    j = as_matrix(J)
    spec = Spectra(j, sector)
    traj = evolve(j, protocol, sector=sector, spectra=spec, observables=())
    exact = traj.final_state
    psi0 = StateVector(_initial_state(protocol, spec, sector, exact.n), exact.n, sector)
    approx = simulate_plan(plan, psi0)
    overlap = np.vdot(exact.amps, approx.amps)
    deficit = 1.0 - abs(overlap) ** 2
    aligned = exact.amps * np.exp(1j * np.angle(overlap))
    err = float(np.linalg.norm(aligned - approx.amps))
    return PlanVerification(float(deficit), err, plan.dt, plan.n_steps)
