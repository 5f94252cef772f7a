from __future__ import annotations

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Sweep parallelism (0 = one worker per CPU)
    HEADWAVE_THREADS: int = Field(0, ge=0)

    # Adaptive quadrature
    HEADWAVE_QUAD_ABS_TOL: float = Field(1e-10, gt=0)
    HEADWAVE_QUAD_REL_TOL: float = Field(1e-8, gt=0)
    HEADWAVE_QUAD_LIMIT: int = Field(2**15, ge=50)

    # Nondegeneracy threshold shared by every inversion denominator
    HEADWAVE_EPS_COND: float = Field(1e-8, gt=0)

    # Validation lattice (points per dimension)
    HEADWAVE_LATTICE_POINTS: int = Field(512, ge=2)

    # Finite differences, relative to domain width
    HEADWAVE_FD_REL_STEP: float = Field(1e-4, gt=0)
    HEADWAVE_GAUGE_FD_REL_STEP: float = Field(1e-3, gt=0)

    # Composite Gauss-Legendre rule for quadrature-backed potentials
    HEADWAVE_GL_NODES: int = Field(16, ge=2)
    HEADWAVE_GL_PANEL_WIDTH: float = Field(0.5, gt=0)

    # Arc-length table for curve scenes
    HEADWAVE_ARC_PANELS: int = Field(4096, ge=16)

    # Logging
    LOG_LEVEL: str = "WARNING"
    ENABLE_FILE_LOGGING: bool = False
    LOG_FORMAT: Literal["text", "json"] = "text"

    class Config:
        case_sensitive = True
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "allow"


@lru_cache
def get_settings() -> Settings:  # pragma: no cover
    return Settings()
