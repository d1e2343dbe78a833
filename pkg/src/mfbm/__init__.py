"""Series simulation of the multiparameter fractional Brownian motion on a ball."""

__version__ = "0.1.0"

from .bases import BasisKind, BasisSpec, CoefficientTable, basis_eval, build_table, coeff_b, parseval_partial
from .errors import (
    ConvergenceError,
    InsufficientSamplesError,
    MfbmError,
    OutsideBallError,
    ParameterError,
    PoleError,
    QuadratureError,
)
from .harmonics import HarmonicIndex, enumerate_indices, eval_harmonic, harmonic_count
from .kernel_cov import ModelParams, covariance_field, covariance_rm, kernel_a
from .rng import GaussianSource, derive_seed
from .simulator import (
    FieldSample,
    TruncationSpec,
    empirical_covariance,
    sample_field,
    sample_replicates,
    truncated_covariance,
    truncation_diagnostic,
)

__all__ = [
    "__version__",
    "BasisKind",
    "BasisSpec",
    "CoefficientTable",
    "ConvergenceError",
    "FieldSample",
    "GaussianSource",
    "HarmonicIndex",
    "InsufficientSamplesError",
    "MfbmError",
    "ModelParams",
    "OutsideBallError",
    "ParameterError",
    "PoleError",
    "QuadratureError",
    "TruncationSpec",
    "basis_eval",
    "build_table",
    "coeff_b",
    "covariance_field",
    "covariance_rm",
    "derive_seed",
    "empirical_covariance",
    "enumerate_indices",
    "eval_harmonic",
    "harmonic_count",
    "kernel_a",
    "parseval_partial",
    "sample_field",
    "sample_replicates",
    "truncated_covariance",
    "truncation_diagnostic",
]
