"""Numerical index theory for Morse-Sturm systems with indefinite symmetry.

The package computes focal instants, their signatures, and constrained
spectral-index counts for second-order linear systems J'' = R(t) J on the
unit interval, where symmetry is measured by a fixed nondegenerate (possibly
indefinite) bilinear form. A geometry layer turns geodesics in explicit
metric charts into such systems, and a command line driver exposes the
pipeline with CSV/JSON outputs.
"""

from . import errors
from .focal import (
    FocalInstant,
    FocalScan,
    MaslovAgreement,
    maslov_index,
    maslov_robust,
    scan_focal,
)
from .forms import (
    Inertia,
    MetricForm,
    Subspace,
    check_g_symmetric,
    g_orthogonal_complement,
    inertia,
    matrix_curve_inertia,
    restrict,
    subspaces_equal,
)
from .geometry import (
    BUILTIN_CHARTS,
    GeodesicPath,
    GeodesicSeed,
    MetricChart,
    ParallelFrame,
    SubmanifoldGerm,
    chart_by_name,
    integrate_geodesic,
    orthonormal_frame_at,
    parallel_frame,
    trivialize,
    trivialize_from_seed,
)
from .indexform import (
    DiscreteForm,
    EvolutionTrace,
    IndexJump,
    IndexReport,
    Mesh,
    assemble_Ct,
    assemble_I1,
    assemble_It_hat,
    constrained_index,
    constraint_kernel,
    default_t_grid,
    evolution_trace,
    verify,
)
from .problem import (
    BoundaryData,
    CoefficientPath,
    MorseSturmProblem,
    Perturbation,
    SmoothCurve,
    WitnessSeed,
    fixture_path,
    generate_timelike_2d,
    list_fixtures,
    load,
    load_matrix_curve,
    perturb,
    save,
    validate,
)
from .solver import (
    FundamentalSolution,
    TimelikeWitness,
    solve_fundamental,
    solve_witness,
    wronskian_drift,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "FocalInstant",
    "FocalScan",
    "MaslovAgreement",
    "maslov_index",
    "maslov_robust",
    "scan_focal",
    "Inertia",
    "MetricForm",
    "Subspace",
    "check_g_symmetric",
    "g_orthogonal_complement",
    "inertia",
    "matrix_curve_inertia",
    "restrict",
    "subspaces_equal",
    "BUILTIN_CHARTS",
    "GeodesicPath",
    "GeodesicSeed",
    "MetricChart",
    "ParallelFrame",
    "SubmanifoldGerm",
    "chart_by_name",
    "integrate_geodesic",
    "orthonormal_frame_at",
    "parallel_frame",
    "trivialize",
    "trivialize_from_seed",
    "DiscreteForm",
    "EvolutionTrace",
    "IndexJump",
    "IndexReport",
    "Mesh",
    "assemble_Ct",
    "assemble_I1",
    "assemble_It_hat",
    "constrained_index",
    "constraint_kernel",
    "default_t_grid",
    "evolution_trace",
    "verify",
    "BoundaryData",
    "CoefficientPath",
    "MorseSturmProblem",
    "Perturbation",
    "SmoothCurve",
    "WitnessSeed",
    "fixture_path",
    "generate_timelike_2d",
    "list_fixtures",
    "load",
    "load_matrix_curve",
    "perturb",
    "save",
    "validate",
    "FundamentalSolution",
    "TimelikeWitness",
    "solve_fundamental",
    "solve_witness",
    "wronskian_drift",
    "__version__",
]
