"""Forward and inverse conductance problems on well-connected spider
networks.

The forward map sends per-edge conductances to the boundary response matrix;
the inverse solver recovers piecewise-constant conductances from a measured
response through a regularized least-squares formulation. Experiment runners
reproduce the stability behavior of the recovery as the number of conductance
blocks grows.
"""

from ._kernels import BACKEND as kernel_backend
from .errors import (
    NonpositiveConductanceError,
    SingularInteriorBlockError,
    SpiderNetError,
)
from .experiments import (
    CellResult,
    InstanceResult,
    ProbeRow,
    RatioExperiment,
    RegressionResult,
    SweepConfig,
    linear_fit,
    run_illposedness_probe,
    run_instance,
    run_ratio_vs_s,
    run_recovery_sweep,
)
from .fileio import (
    LoadedProblem,
    load_problem,
    problem_to_document,
    read_matrix_csv,
    write_matrix_csv,
    write_problem_json,
)
from .forward import (
    ConditioningProbe,
    HarmonicExtensionSet,
    LaplacianMatrix,
    assemble_laplacian,
    conditioning_probe,
    forward_with_diffs,
    harmonic_extensions,
    response_from_conductance,
    response_matrix,
    response_matrix_violations,
    sensitivity_jacobian,
)
from .inverse import (
    FULL_SPACE,
    REDUCED,
    InverseProblem,
    ObjectiveBreakdown,
    RecoveryResult,
    block_means,
    full_objective,
    lipschitz_ratio,
    objective_gradient,
    reduced_objective,
    solve,
)
from .seeding import derive_seed, make_rng
from .topology import (
    Edge,
    EdgePartition,
    SpiderTopology,
    build_spider,
    random_partition,
    sample_pc_conductance,
)
from .warmstart import (
    InitialGuess,
    constant_fit,
    initial_guess,
    initial_voltages,
    unit_response,
)

__version__ = "0.1.0"

__all__ = [
    "CellResult",
    "ConditioningProbe",
    "Edge",
    "EdgePartition",
    "FULL_SPACE",
    "HarmonicExtensionSet",
    "InitialGuess",
    "InstanceResult",
    "InverseProblem",
    "LaplacianMatrix",
    "LoadedProblem",
    "NonpositiveConductanceError",
    "ObjectiveBreakdown",
    "ProbeRow",
    "RatioExperiment",
    "RecoveryResult",
    "REDUCED",
    "RegressionResult",
    "SingularInteriorBlockError",
    "SpiderNetError",
    "SpiderTopology",
    "SweepConfig",
    "assemble_laplacian",
    "block_means",
    "build_spider",
    "conditioning_probe",
    "constant_fit",
    "derive_seed",
    "forward_with_diffs",
    "full_objective",
    "harmonic_extensions",
    "initial_guess",
    "initial_voltages",
    "kernel_backend",
    "linear_fit",
    "lipschitz_ratio",
    "load_problem",
    "make_rng",
    "objective_gradient",
    "problem_to_document",
    "random_partition",
    "read_matrix_csv",
    "reduced_objective",
    "response_from_conductance",
    "response_matrix",
    "response_matrix_violations",
    "run_illposedness_probe",
    "run_instance",
    "run_ratio_vs_s",
    "run_recovery_sweep",
    "sample_pc_conductance",
    "sensitivity_jacobian",
    "solve",
    "unit_response",
    "write_matrix_csv",
    "write_problem_json",
]
