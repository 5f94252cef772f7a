"""
Kernel of the head wave transform.

Exports:
    - gauge_forward_constant / gauge_forward_general / gauge_fixed_theta: kernel elements from potentials
    - potentials_from_null_constant / potential_from_null_general / potentials_fixed_theta: the converse
    - depth_null_generator: null fields depending on depth only
    - check_div_condition / verify_annihilation: residual checks
"""

from apps.gauge.potentials import (
    OneForm,
    RayPotential,
    StaircasePotential,
    clip_rays,
    constant_direction,
    curl_fd,
    directional_fd,
    extended_direction,
    foot_potential,
    second_directional_fd,
    segment_integrals,
    shadow_box,
)
from apps.gauge.schemas import (
    BOUNDARY_TOL,
    CLOSED_TOL,
    FORWARD_TOL,
    PATH_TOL,
    PDE_TOL,
    Annihilation,
    GaugeReport,
    GeneralGauge,
)
from apps.gauge.service import (
    check_div_condition,
    constant_contract,
    depth_null_generator,
    fixed_theta_contract,
    flat_null_scene,
    gauge_fixed_theta,
    gauge_forward_constant,
    gauge_forward_general,
    hyperplane_null_scene,
    potential_from_null_general,
    potentials_fixed_theta,
    potentials_from_null_constant,
    verify_annihilation,
)

__all__ = [
    "Annihilation",
    "BOUNDARY_TOL",
    "CLOSED_TOL",
    "FORWARD_TOL",
    "GaugeReport",
    "GeneralGauge",
    "OneForm",
    "PATH_TOL",
    "PDE_TOL",
    "RayPotential",
    "StaircasePotential",
    "check_div_condition",
    "clip_rays",
    "constant_contract",
    "constant_direction",
    "curl_fd",
    "depth_null_generator",
    "directional_fd",
    "extended_direction",
    "fixed_theta_contract",
    "flat_null_scene",
    "foot_potential",
    "gauge_fixed_theta",
    "gauge_forward_constant",
    "gauge_forward_general",
    "hyperplane_null_scene",
    "potential_from_null_general",
    "potentials_fixed_theta",
    "potentials_from_null_constant",
    "second_directional_fd",
    "segment_integrals",
    "shadow_box",
    "verify_annihilation",
]
