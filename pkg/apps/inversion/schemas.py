# apps/inversion/schemas.py
"""Reconstruction results and the data-derivative bundle inversions consume."""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class ReconMethod(str, Enum):
    """Which explicit formula produced a reconstruction."""
    THM21 = "thm21"
    CONSTANT_1 = "rmk22-1"
    CONSTANT_2 = "rmk22-2"
    CONSTANT_3 = "rmk22-3"
    PARTIAL = "rmk22-partial"
    THM31 = "thm31"
    THM41 = "thm41"


class NullityStatus(str, Enum):
    CONSISTENT = "consistent-with-zero"
    VIOLATION = "violation"


def _float_array(value):
    return None if value is None else np.array(value, dtype=float)


class DataDerivatives(BaseModel):
    """
    ∂_x R f(x, 0) and ∂_d R f(x, d)|_{d=0} at the reconstruction nodes.

    `step_x` and `step_d` are the finite-difference steps that produced them.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis: np.ndarray = Field(..., description="Reconstruction nodes")
    dx: np.ndarray = Field(..., description="Derivative along the gliding set at d = 0")
    dd: np.ndarray = Field(..., description="One-sided derivative in d at d = 0")
    step_x: float = Field(..., gt=0)
    step_d: float = Field(..., gt=0)

    @field_validator("axis", "dx", "dd", mode="before")
    @classmethod
    def _as_array(cls, value):
        return _float_array(value)

    def scaled(self, factor: float) -> "DataDerivatives":
        return self.model_copy(update={"dx": factor * self.dx, "dd": factor * self.dd})


class Recon1D(BaseModel):
    """
    Reconstructed profile samples.

    For curve scenes `source_axis` holds the arc-length nodes, `arguments` the
    values γ1 there and `raw_values` the reconstruction at those arguments;
    `axis`/`values` are then the resampling onto a uniform argument grid.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis: np.ndarray = Field(..., description="Argument grid of f̃")
    values: np.ndarray = Field(..., description="Reconstructed f̃ on the grid")
    denom_min: float = Field(..., description="Smallest |denominator| met")
    method: ReconMethod = Field(..., description="Formula tag")
    scene_hash: str = Field("", description="Hash of the scene that produced the data")
    source_axis: Optional[np.ndarray] = Field(None, description="Data nodes when they differ from the argument grid")
    arguments: Optional[np.ndarray] = Field(None, description="f̃ arguments at the data nodes")
    raw_values: Optional[np.ndarray] = Field(None, description="Reconstruction at `arguments`")

    @field_validator("axis", "values", "source_axis", "arguments", "raw_values", mode="before")
    @classmethod
    def _as_array(cls, value):
        return _float_array(value)

    def error_against(self, truth) -> np.ndarray:
        """Pointwise |f_recon − f_true| for a callable truth."""
        expected = np.array([truth(float(x)) for x in self.axis])
        return np.abs(self.values - expected)


class SliceRecon(BaseModel):
    """Fixed-direction reconstruction on several parallel lines, keyed by line offset."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta0: tuple[float, float] = Field(..., description="Gliding direction")
    lines: Dict[float, Recon1D] = Field(default_factory=dict, description="offset -> reconstruction along s")

    @property
    def denom_min(self) -> float:
        return min(r.denom_min for r in self.lines.values())

    @property
    def offsets(self) -> List[float]:
        return sorted(self.lines)

    def points(self) -> np.ndarray:
        """Rows (x1, x2, f̃) over every line."""
        t = np.asarray(self.theta0)
        perp = np.array([-t[1], t[0]])
        rows = []
        for offset in self.offsets:
            recon = self.lines[offset]
            xy = recon.axis[:, None] * t[None, :] + offset * perp[None, :]
            rows.append(np.column_stack((xy, recon.values)))
        return np.vstack(rows)


class NullityVerdict(BaseModel):
    """Outcome of propagating the single-row recursion."""
    status: NullityStatus
    ratio: float = Field(..., description="Recursion factor C")
    x: Optional[float] = Field(None, description="First node where the recursion breaks")
    residual: float = Field(0.0, description="Largest recursion residual seen")


class XrayEstimate(BaseModel):
    """Far-left limit of ∂_d R f and the X-ray value it determines."""
    xray: float = Field(..., description="∫f̃(x′ + tθ0) dt")
    raw_limit: float = Field(..., description="Limit of ∂_d R f(x′ + sθ0, 0)")
    ratio: float = Field(..., description="D_θ0 β at the last sample")
    s_values: List[float] = Field(default_factory=list, description="s values evaluated")
    estimates: List[float] = Field(default_factory=list, description="Per-sample X-ray estimates")


class DerivativeResiduals(BaseModel):
    """Finite differences of the data against the analytic derivative identities."""
    points: List[List[float]] = Field(default_factory=list)
    dx_residual: List[float] = Field(default_factory=list)
    dd_residual: List[float] = Field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.dx_residual + self.dd_residual, default=0.0)
