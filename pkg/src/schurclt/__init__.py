"""Exact, asymptotic and Monte Carlo tools for Schur-generating-function particle systems."""
from .symcore import Signature, SparsePolynomial, schur_evaluate, schur_dimension, skew_dimension, lr_expand
from .measures import SignatureMeasure, StepFunction, delta_measure, project_measure, multiply_measure
from .freeprob import CompactMeasure, TruncatedSeries
from .moments import exact_covariance, exact_mean, lln_moment
from .asymcov import aztec_cov, clt_cov_combined, restriction_cov, schur_weyl_cov, tensor_cov

__version__ = "0.1.0"

__all__ = [
    "Signature", "SparsePolynomial", "schur_evaluate", "schur_dimension", "skew_dimension", "lr_expand",
    "SignatureMeasure", "StepFunction", "delta_measure", "project_measure", "multiply_measure",
    "CompactMeasure", "TruncatedSeries",
    "exact_covariance", "exact_mean", "lln_moment",
    "aztec_cov", "clt_cov_combined", "restriction_cov", "schur_weyl_cov", "tensor_cov",
]
