"""
Explicit reconstruction formulas.

Exports:
    - invert_2d_variable / invert_2d_constant: flat gliding line
    - invert_partial_data / partial_data_nullity_check: a single data row
    - invert_fixed_theta / xray_limit: hyperplane, fixed direction
    - invert_curve: gliding along a plane curve
    - derivative_identity_residuals / grid_identity_residuals: finite differences against the analytic identities
"""

from apps.inversion.derivatives import (
    callback_derivatives,
    central_difference,
    data_derivatives,
    forward_difference,
    grid_derivatives,
)
from apps.inversion.schemas import (
    DataDerivatives,
    DerivativeResiduals,
    NullityStatus,
    NullityVerdict,
    Recon1D,
    ReconMethod,
    SliceRecon,
    XrayEstimate,
)
from apps.inversion.service import (
    derivative_identity_residuals,
    grid_identity_residuals,
    invert_2d_constant,
    invert_2d_constant_all,
    invert_2d_variable,
    invert_curve,
    invert_fixed_theta,
    invert_partial_data,
    partial_data_nullity_check,
    recursion_ratio,
    write_recon_csv,
    xray_limit,
)

__all__ = [
    "DataDerivatives",
    "DerivativeResiduals",
    "NullityStatus",
    "NullityVerdict",
    "Recon1D",
    "ReconMethod",
    "SliceRecon",
    "XrayEstimate",
    "callback_derivatives",
    "central_difference",
    "data_derivatives",
    "derivative_identity_residuals",
    "forward_difference",
    "grid_derivatives",
    "grid_identity_residuals",
    "invert_2d_constant",
    "invert_2d_constant_all",
    "invert_2d_variable",
    "invert_curve",
    "invert_fixed_theta",
    "invert_partial_data",
    "partial_data_nullity_check",
    "recursion_ratio",
    "write_recon_csv",
    "xray_limit",
]
