"""Pauli-measurement tomography: full-state and overlapping estimators, plus the
classical lower-bound experiment and a seeded experiment harness."""
from .estimator import (
    PauliAccumulator,
    TomographyPlan,
    accumulate,
    project_to_physical,
    reconstruct,
    run_full_tomography,
    shots_per_basis,
)
from .measurement import (
    OutcomeSampler,
    Shot,
    ShotBatch,
    ic_povm,
    is_compatible,
    outcome_distribution,
    random_basis,
    read_shots,
    sample_shot,
    shot_sign,
    write_shots,
)
from .overlap import (
    InsufficientCoverageError,
    OverlapPlan,
    SubsetEstimate,
    coverage_check,
    reconstruct_subset,
    run_overlap,
    total_shots,
)
from .qstate import (
    StateSpec,
    expectation,
    frobenius_norm,
    make_state,
    one_norm_distance,
    partial_trace,
    pauli_decompose,
    pauli_matrix,
)

__version__ = "0.1.0"
