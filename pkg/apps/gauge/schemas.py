# apps/gauge/schemas.py
"""Gauge constructions: generated null fields, annihilation checks and the residual report."""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from apps.expr import ExprAST
from apps.transform import DataGrid

FORWARD_TOL = 1e-7
CLOSED_TOL = 1e-5
PDE_TOL = 1e-5
PATH_TOL = 1e-7
BOUNDARY_TOL = 1e-7


class GeneralGauge(BaseModel):
    """
    f = P_u[det(A)^{-1} P_v φ] together with the other operator ordering.

    `ordering_gap` is max |f − f_swapped| on the check lattice.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: ExprAST = Field(..., description="P_u[det^{-1} P_v φ]")
    swapped: ExprAST = Field(..., description="P_v[det^{-1} P_u φ]")
    ordering_gap: float = Field(..., ge=0)


class Annihilation(BaseModel):
    """Outcome of sweeping a claimed null field through its forward operator."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    max_residual: float = Field(..., ge=0, description="max |R f| over every swept node")
    gliding_residual: float = Field(0.0, ge=0, description="max |f| on the gliding set")
    witness: Optional[List[float]] = Field(None, description="Node with the largest residual")
    grids: Dict[str, DataGrid] = Field(default_factory=dict, description="Residual grids by sweep label")


class GaugeReport(BaseModel):
    """Residuals certifying a gauge construction; every entry is finite and non-negative."""
    kind: str = Field(..., description="Which construction produced the report")
    max_forward_residual: float = Field(0.0, description="max |R f| on the verification sweep")
    closedness_residual: float = Field(0.0, description="max |∂1ω2 − ∂2ω1| on the lattice")
    pde_residuals: Tuple[float, float] = Field((0.0, 0.0), description="Both second-order identities")
    boundary_residual: float = Field(0.0, description="max |φ| on the gliding set")
    ordering_gap: float = Field(0.0, description="Difference between the two operator orderings")
    path_discrepancy: float = Field(0.0, description="Disagreement of the two integration paths")

    @model_validator(mode="after")
    def _check_residuals(self) -> "GaugeReport":
        for name, value in self.values().items():
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative, got {value}")
        return self

    def values(self) -> Dict[str, float]:
        return {
            "max_forward_residual": self.max_forward_residual,
            "closedness_residual": self.closedness_residual,
            "pde_residual_uv": self.pde_residuals[0],
            "pde_residual_vu": self.pde_residuals[1],
            "boundary_residual": self.boundary_residual,
            "ordering_gap": self.ordering_gap,
            "path_discrepancy": self.path_discrepancy,
        }

    def exceeded(self) -> List[str]:
        """Names of the residuals above their thresholds (ordering_gap is informational)."""
        limits = {
            "max_forward_residual": FORWARD_TOL,
            "closedness_residual": CLOSED_TOL,
            "pde_residual_uv": PDE_TOL,
            "pde_residual_vu": PDE_TOL,
            "boundary_residual": BOUNDARY_TOL,
            "path_discrepancy": PATH_TOL,
        }
        values = self.values()
        return [name for name, limit in limits.items() if values[name] > limit]

    def to_text(self) -> str:
        lines = [f"kind = {self.kind}"]
        lines += [f"{name} = {value:.6e}" for name, value in self.values().items()]
        return "\n".join(lines) + "\n"
