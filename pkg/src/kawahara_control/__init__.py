"""Moment-method controllability toolkit for the Kawahara equation on a
periodic domain.

Pipeline: eigenvalue tables (``spectrum``), truncated Fourier fields
(``fields``), explicit biorthogonal families built from Weierstrass products
and sinc multipliers (``biortho``), finite moment problems and their solvers
(``moment``), exact linear and pseudo-spectral nonlinear evolution plus the
fixed-point controllability loop (``simulate``), and a config-driven CLI
(``cli``).
"""

from .biortho import (
    BiorthogonalFamily,
    BiorthoParams,
    biorthogonality_defect,
    biorthogonality_matrix,
    build_family,
    multiplier_M,
    psi,
    theta,
    weierstrass_P,
    zeta,
)
from .errors import ConditioningError, InstabilityError
from .fields import (
    ShapeProfile,
    SpectralField,
    WeightedSpaceParams,
    analyze,
    gaussian_profile,
    hs_norm,
    l2_coeff_norm,
    read_field_csv,
    synthesize,
    weighted_norm,
    write_field_csv,
)
from .moment import (
    ControlSignal,
    ExponentialSumControl,
    MomentProblem,
    SampledControl,
    assemble_null_control_problem,
    assemble_reachability_problem,
    gram_matrix,
    moment_residual,
    moment_residual_quadrature,
    moment_residual_richardson,
    solve_biortho_series,
    solve_min_norm,
)
from .simulate import (
    FixedPointReport,
    Trajectory,
    evolve_linear,
    evolve_nonlinear,
    fixed_point_control,
    free_endpoint,
    nonlinear_duhamel_endpoint,
)
from .spectrum import (
    CANONICAL,
    DispersionParams,
    EigenvalueSequence,
    collision_classes,
    eigenvalue,
    eigenvalue_sequence,
    has_collisions,
    min_gap,
    sorted_gaps,
)

__version__ = "1.0.0"

__all__ = [
    "BiorthogonalFamily",
    "BiorthoParams",
    "CANONICAL",
    "ConditioningError",
    "ControlSignal",
    "DispersionParams",
    "EigenvalueSequence",
    "ExponentialSumControl",
    "FixedPointReport",
    "InstabilityError",
    "MomentProblem",
    "SampledControl",
    "ShapeProfile",
    "SpectralField",
    "Trajectory",
    "WeightedSpaceParams",
    "analyze",
    "assemble_null_control_problem",
    "assemble_reachability_problem",
    "biorthogonality_defect",
    "biorthogonality_matrix",
    "build_family",
    "collision_classes",
    "eigenvalue",
    "eigenvalue_sequence",
    "evolve_linear",
    "evolve_nonlinear",
    "fixed_point_control",
    "free_endpoint",
    "gaussian_profile",
    "gram_matrix",
    "has_collisions",
    "hs_norm",
    "l2_coeff_norm",
    "min_gap",
    "moment_residual",
    "moment_residual_quadrature",
    "moment_residual_richardson",
    "multiplier_M",
    "nonlinear_duhamel_endpoint",
    "psi",
    "read_field_csv",
    "solve_biortho_series",
    "solve_min_norm",
    "sorted_gaps",
    "synthesize",
    "theta",
    "weierstrass_P",
    "weighted_norm",
    "write_field_csv",
    "zeta",
]
