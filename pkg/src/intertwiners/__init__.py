"""Conserved observables of non-Hermitian Hamiltonians with antilinear symmetries."""

from __future__ import annotations

from .dynamics import (
    DriftReport,
    FloquetDrive,
    StateVector,
    drift_report,
    evolve,
    floquet_propagator,
    micromotion,
    passive,
    slow_mode_rates,
    stroboscopic_etas,
    stroboscopic_report,
)
from .intertwine import (
    IntertwinerSet,
    NoSeedError,
    Relation,
    SeedError,
    SpectrumNotSymmetric,
    eta_from_spectrum,
    expected_count,
    recursive_tower,
    seed_eta,
    solve_relation,
    tower_products,
    verify_relation,
)
from .linalg import (
    DEFAULT_TOL,
    NumericalFailure,
    OperatorBasis,
    hermitian_split,
    independent_count,
    nullspace_basis,
    span_residual,
)
from .models import (
    MODELS,
    CircuitParams,
    SpinModelParams,
    build_circuit,
    build_dimer,
    build_hatano_nelson,
    build_model,
    build_pt_spin,
    h3_reference,
    parity,
    spin_matrices,
)
from .spectral import (
    Cluster,
    DegeneracyReport,
    JordanChain,
    SpectralData,
    SymmetryDescriptor,
    classify_degeneracies,
    eig_biorthogonal,
    jordan_chain,
    spectrum_symmetry,
)

__version__ = "0.1.0"
