"""
Forward head wave transforms.

Exports:
    - hwt_flat2d / hwt_flat2d_reduced: flat gliding line in the plane
    - hwt_fixed_theta / hwt_fixed_theta_field: hyperplane in R^3, fixed direction
    - hwt_curve / hwt_curve_reduced: gliding along a plane curve
    - sweep / sweep_lines: DataGrid sampling
    - write_datagrid_csv / read_datagrid_csv / scene_hash
"""

from apps.transform.io import read_datagrid_csv, read_table_csv, scene_hash, write_datagrid_csv, write_table_csv
from apps.transform.quadrature import composite_gauss_legendre, gauss_legendre_nodes, integrate
from apps.transform.schemas import DataGrid, ForwardMethod, LegValues, QuadratureOptions
from apps.transform.service import (
    forward_evaluator,
    hwt_curve,
    hwt_curve_reduced,
    hwt_fixed_theta,
    hwt_fixed_theta_field,
    hwt_flat2d,
    hwt_flat2d_reduced,
    leg_integrals,
    line_integral,
    profile_integral,
    sweep,
    sweep_lines,
)

__all__ = [
    "DataGrid",
    "ForwardMethod",
    "LegValues",
    "QuadratureOptions",
    "composite_gauss_legendre",
    "forward_evaluator",
    "gauss_legendre_nodes",
    "hwt_curve",
    "hwt_curve_reduced",
    "hwt_fixed_theta",
    "hwt_fixed_theta_field",
    "hwt_flat2d",
    "hwt_flat2d_reduced",
    "integrate",
    "leg_integrals",
    "line_integral",
    "profile_integral",
    "read_datagrid_csv",
    "read_table_csv",
    "scene_hash",
    "sweep",
    "sweep_lines",
    "write_datagrid_csv",
    "write_table_csv",
]
