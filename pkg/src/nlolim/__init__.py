"""Static nonlinear-optical responses, their three-level limits, and
lowest-order relativistic corrections to those limits."""

from nlolim.spectral import (
    Coefficients,
    Spectrum,
    alpha_sos,
    barred_moment,
    beta_sos,
    coefficients,
    gamma_sos,
)
from nlolim.sumrules import (
    LambdaMatrix,
    LambdaSet,
    lambda_direct,
    lambda_from_p2,
    trk_lhs,
    trk_residual,
    trk_rhs_rel,
)
from nlolim.units import ALPHA_FS, C_AU

__version__ = "0.1.0"

__all__ = [
    "ALPHA_FS",
    "C_AU",
    "Coefficients",
    "LambdaMatrix",
    "LambdaSet",
    "Spectrum",
    "alpha_sos",
    "barred_moment",
    "beta_sos",
    "coefficients",
    "gamma_sos",
    "lambda_direct",
    "lambda_from_p2",
    "trk_lhs",
    "trk_residual",
    "trk_rhs_rel",
]
