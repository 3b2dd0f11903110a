"""Gaussian-state quantum Fisher information for lossy stellar interferometry.

The package compares three strategies for estimating the phase and coherence
of a weak thermal two-mode source: direct interferometry under transmission
loss, local heterodyne detection, and continuous-variable teleportation over
a lossy, finitely squeezed two-mode squeezed vacuum link.
"""

from .gaussian import (
    ConditioningError,
    GaussianState,
    HomodyneOutcome,
    SymplecticForm,
    beamsplitter,
    condition_double_homodyne,
    partial_trace,
    pure_loss,
    symplectic_form,
    tensor,
    two_mode_squeeze,
    vacuum,
)
from .qfi import (
    FisherMatrix,
    GaussianFamily,
    SingularFamilyError,
    gaussian_fidelity,
    gaussian_infidelity,
    qfi_fidelity_limit,
    qfi_matrix,
    vectorize_cov,
)
from .strategies import (
    DI,
    INFINITE,
    LOCAL_HET,
    TELEPORT,
    ConditionalMoments,
    LinkParams,
    MonteCarloQFI,
    StellarParams,
    StrategyQFI,
    di_qfi,
    local_heterodyne_fi,
    monte_carlo_qfi,
    sample_outcome,
    squeezing_db,
    stellar_state,
    teleport_conditional,
    teleport_qfi_closed,
    teleport_qfi_ensemble,
    teleport_qfi_infinite_squeezing,
)
from .sweep import (
    CrossoverQuery,
    SweepError,
    SweepSpec,
    find_crossover,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    scan_crossovers,
)

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "GaussianState",
    "HomodyneOutcome",
    "SymplecticForm",
    "beamsplitter",
    "condition_double_homodyne",
    "partial_trace",
    "pure_loss",
    "symplectic_form",
    "tensor",
    "two_mode_squeeze",
    "vacuum",
    "FisherMatrix",
    "GaussianFamily",
    "SingularFamilyError",
    "gaussian_fidelity",
    "gaussian_infidelity",
    "qfi_fidelity_limit",
    "qfi_matrix",
    "vectorize_cov",
    "DI",
    "INFINITE",
    "LOCAL_HET",
    "TELEPORT",
    "ConditionalMoments",
    "LinkParams",
    "MonteCarloQFI",
    "StellarParams",
    "StrategyQFI",
    "di_qfi",
    "local_heterodyne_fi",
    "monte_carlo_qfi",
    "sample_outcome",
    "squeezing_db",
    "stellar_state",
    "teleport_conditional",
    "teleport_qfi_closed",
    "teleport_qfi_ensemble",
    "teleport_qfi_infinite_squeezing",
    "CrossoverQuery",
    "SweepError",
    "SweepSpec",
    "find_crossover",
    "rows_to_csv",
    "rows_to_json",
    "run_sweep",
    "scan_crossovers",
]
