"""
Scene definitions and assumption checks.

Exports:
    - FlatScene2D / HyperplaneScene / CurveScene: the three gliding geometries
    - validate: lattice checks of the geometric assumptions
    - nearest_point_frame: tube projection for curve scenes
"""

from apps.scene.geometry import CurveGeometry, FramePoint, clip_ray, clip_segment
from apps.scene.schemas import (
    AssumptionReport,
    AssumptionVerdict,
    Box,
    CurveScene,
    ExtendedField,
    FieldMode,
    FlatScene2D,
    HyperplaneScene,
    Profile,
    SceneKind,
    Verdict,
    det_frame,
)
from apps.scene.service import Scene, induced_flat_scene, nearest_point_frame, validate

__all__ = [
    "AssumptionReport",
    "AssumptionVerdict",
    "Box",
    "CurveGeometry",
    "CurveScene",
    "ExtendedField",
    "FieldMode",
    "FlatScene2D",
    "FramePoint",
    "HyperplaneScene",
    "Profile",
    "Scene",
    "SceneKind",
    "Verdict",
    "clip_ray",
    "clip_segment",
    "det_frame",
    "induced_flat_scene",
    "nearest_point_frame",
    "validate",
]
