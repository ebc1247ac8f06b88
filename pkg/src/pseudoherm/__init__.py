"""Tools for non-Hermitian Hamiltonians with real spectra: exact
normal-ordered operator algebra, equation-of-motion real-closure analysis,
Hermitian counterparts via similarity transformations, and numerical
certification on truncated oscillator bases."""

__version__ = "0.1.0"

from .weyl import (
    Classification,
    IncompatibleAlgebraError,
    NotAFunctionError,
    OperatorPoly,
    RationalComplex,
    classify,
)
from .models import KINDS, InvalidParameterError, ModelSpec, build, series_radius
from .dynamics import (
    DerivativeDepthError,
    EomReport,
    linear_closure_fit,
    nth_time_derivative,
    real_closure_second_order,
    time_derivative,
)
from .transform import (
    NonTerminatingSeriesError,
    NotDeducibleError,
    SimilarityCertificate,
    UnsupportedModelError,
    conjugate_by_exp,
    deduce_hermitian,
    observable_map,
    omega_exponent,
    verify_similarity,
)
from .spectral import (
    BasisConfig,
    DimensionBudgetError,
    EigensolverError,
    ExchangeReport,
    InvalidObservableError,
    InvalidStateError,
    SpectralReport,
    certify,
    default_basis,
    eigenfunction_map,
    exchange_invariance_check,
    matrix_of,
    picture_consistency,
    pu_frequencies,
    reference_spectrum,
    spectrum,
)

__all__ = [
    "__version__",
    "Classification",
    "IncompatibleAlgebraError",
    "NotAFunctionError",
    "OperatorPoly",
    "RationalComplex",
    "classify",
    "KINDS",
    "InvalidParameterError",
    "ModelSpec",
    "build",
    "series_radius",
    "DerivativeDepthError",
    "EomReport",
    "linear_closure_fit",
    "nth_time_derivative",
    "real_closure_second_order",
    "time_derivative",
    "NonTerminatingSeriesError",
    "NotDeducibleError",
    "SimilarityCertificate",
    "UnsupportedModelError",
    "conjugate_by_exp",
    "deduce_hermitian",
    "observable_map",
    "omega_exponent",
    "verify_similarity",
    "BasisConfig",
    "DimensionBudgetError",
    "EigensolverError",
    "ExchangeReport",
    "InvalidObservableError",
    "InvalidStateError",
    "SpectralReport",
    "certify",
    "default_basis",
    "eigenfunction_map",
    "exchange_invariance_check",
    "matrix_of",
    "picture_consistency",
    "pu_frequencies",
    "reference_spectrum",
    "spectrum",
]
