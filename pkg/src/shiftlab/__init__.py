"""Numerical laboratory for compressed shift tuples on graded ideal complements."""

from .polynomials import (
    MatrixPolynomial,
    Polynomial,
    WeightScheme,
    besov_weight,
    monomial_norm_sq,
)
from .grading import (
    GradedComplementBasis,
    HomogeneousIdeal,
    hilbert_function,
    monomial_basis,
)
from .operators import (
    BandedTruncation,
    CommutatorSpectrum,
    EssentialNormTrace,
    ShiftBlocks,
    default_window_schedule,
    operator_norm,
    schatten_partial_sums,
)
from .boundary import (
    BoundaryMaxResult,
    KernelVector,
    OptimizerConfig,
    boundary_sup,
    character_check,
    kernel_vector,
)
from .runner import RunConfig, compare, load_config, run

__version__ = "0.1.0"

__all__ = [
    "Polynomial",
    "MatrixPolynomial",
    "WeightScheme",
    "besov_weight",
    "monomial_norm_sq",
    "HomogeneousIdeal",
    "GradedComplementBasis",
    "hilbert_function",
    "monomial_basis",
    "ShiftBlocks",
    "BandedTruncation",
    "EssentialNormTrace",
    "CommutatorSpectrum",
    "operator_norm",
    "schatten_partial_sums",
    "default_window_schedule",
    "OptimizerConfig",
    "BoundaryMaxResult",
    "KernelVector",
    "boundary_sup",
    "kernel_vector",
    "character_check",
    "RunConfig",
    "load_config",
    "run",
    "compare",
]
