"""Exact simulation and scaling analysis of long-range transverse-field Ising chains."""

from .basis import StateVector, product_state, random_state, x_basis_transform
from .model import (
    CouplingMatrix,
    CouplingSpec,
    HamiltonianAction,
    apply_hamiltonian,
    build_couplings,
)
from .observables import (
    ObservableRecord,
    correlation_function,
    correlation_length,
    domain_count,
    domain_expectation,
    magnetization_moments,
    observable_record,
)
from .spectra import (
    GroundStateResult,
    SchmidtData,
    Spectra,
    SpectralGap,
    binder_cumulant,
    energy_gap,
    ground_state,
    moment_derivative,
    schmidt_gap,
)
from .quench import (
    AITransition,
    DomainDistribution,
    QuenchProtocol,
    TrajectoryRecord,
    ai_scaling,
    ai_transition,
    ai_transition_refined,
    domain_distribution,
    evolve,
    excitation_probability,
    kz_fit,
    kz_sweep,
    noneq_collapse,
    residual_energy,
    residual_observable,
    theoretical_mu,
)
from .fss import (
    CriticalFit,
    ExponentSet,
    PowerlawFit,
    ScalingDataset,
    binder_crossing,
    collapse_chi2,
    fit_gc,
    nu_from_moments,
    powerlaw_fit,
)
from .expfit import ExponentialSumFit, eval_error, fit_exponential_sum
from .ions import (
    ModeData,
    RabiAssignment,
    effective_couplings,
    equilibrium_positions,
    normal_modes,
    rabi_assignment,
    term_couplings,
)
from .circuit import (
    CircuitPlan,
    KDecomposition,
    build_k_decomposition,
    compile_evolution,
    simulate_plan,
    trotter_step_error,
    verify_plan,
)

__version__ = "0.1.0"
