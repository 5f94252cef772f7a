# apps/transform/schemas.py
"""Quadrature options, per-leg values and sampled data grids."""

from __future__ import annotations

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from apps.core.exceptions import InsufficientGrid, NumericalError
from conf.settings import get_settings

UNIFORM_REL_TOL = 1e-9


class ForwardMethod(str, Enum):
    """Which forward evaluator a sweep uses."""
    AUTO = "auto"
    GEOMETRIC = "geometric"
    REDUCED = "reduced"


class QuadratureOptions(BaseModel):
    """Tolerances for adaptive quadrature (QUADPACK through scipy)."""
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default_factory=lambda: get_settings().HEADWAVE_QUAD_ABS_TOL, gt=0,
                           description="Absolute tolerance")
    rel_tol: float = Field(default_factory=lambda: get_settings().HEADWAVE_QUAD_REL_TOL, gt=0,
                           description="Relative tolerance")
    limit: int = Field(default_factory=lambda: get_settings().HEADWAVE_QUAD_LIMIT, ge=50,
                       description="Maximum number of subintervals")


class LegValues(BaseModel):
    """The three integrals making up one head wave value."""
    model_config = ConfigDict(frozen=True)

    descent: float = Field(..., description="Integral along the descending leg")
    glide: float = Field(..., description="Integral along the gliding segment")
    ascent: float = Field(..., description="Integral along the ascending leg")

    @property
    def total(self) -> float:
        return self.descent + self.glide + self.ascent


def is_uniform(axis: np.ndarray) -> bool:
    if axis.size < 3:
        return True
    steps = np.diff(axis)
    scale = max(float(np.max(np.abs(axis))), 1.0)
    return bool(np.all(np.abs(steps - steps[0]) <= UNIFORM_REL_TOL * scale))


class DataGrid(BaseModel):
    """
    Head wave samples on a uniform (axis1, d) lattice.

    values[i, j] is the transform at (axis1[i], axis2[j]); axis2 starts at d = 0.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axis1: np.ndarray = Field(..., description="Uniform x (or s, or arc-length) nodes")
    axis2: np.ndarray = Field(..., description="Uniform d nodes starting at 0")
    values: np.ndarray = Field(..., description="Samples, shape (len(axis1), len(axis2))")
    scene_hash: str = Field("", description="Fingerprint of the generating scene")
    quad_tol: float = Field(0.0, ge=0, description="Absolute quadrature tolerance used")

    @field_validator("axis1", "axis2", "values", mode="before")
    @classmethod
    def _as_float_array(cls, value):
        return np.array(value, dtype=float)

    @model_validator(mode="after")
    def _check_grid(self) -> "DataGrid":
        if self.axis1.ndim != 1 or self.axis2.ndim != 1 or self.axis1.size == 0 or self.axis2.size == 0:
            raise InsufficientGrid("grid axes must be non-empty vectors")
        if self.values.shape != (self.axis1.size, self.axis2.size):
            raise InsufficientGrid("values do not match the grid axes",
                                   shape=list(self.values.shape), axes=[self.axis1.size, self.axis2.size])
        for name, axis in (("axis1", self.axis1), ("axis2", self.axis2)):
            if axis.size > 1 and np.any(np.diff(axis) <= 0):
                raise InsufficientGrid(f"{name} must be strictly increasing")
            if not is_uniform(axis):
                raise InsufficientGrid(f"{name} must be uniform")
        if self.axis2[0] != 0.0:
            raise InsufficientGrid("d axis must start at 0", d0=float(self.axis2[0]))
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise NumericalError("grid holds a non-finite value",
                                 x=float(self.axis1[bad[0]]), d=float(self.axis2[bad[1]]))
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def step1(self) -> Optional[float]:
        return float(self.axis1[1] - self.axis1[0]) if self.axis1.size > 1 else None

    @property
    def step2(self) -> Optional[float]:
        return float(self.axis2[1] - self.axis2[0]) if self.axis2.size > 1 else None

    def with_values(self, values: np.ndarray) -> "DataGrid":
        return DataGrid(axis1=self.axis1, axis2=self.axis2, values=values,
                        scene_hash=self.scene_hash, quad_tol=self.quad_tol)
