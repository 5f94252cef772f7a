# apps/core/schemas.py
"""Results of the batch commands, shared by the CLI and in-process callers."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from apps.expr import ExprAST
from apps.gauge import Annihilation, GaugeReport
from apps.inversion import Recon1D, SliceRecon
from apps.transform import DataGrid


class ForwardSummary(BaseModel):
    """What `forward` wrote and the quadrature work it took."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grids: List[DataGrid] = Field(default_factory=list, description="One grid per swept line")
    paths: List[Path] = Field(default_factory=list)
    nodes: int = 0
    min_value: float = 0.0
    max_value: float = 0.0
    quadrature: Dict[str, float] = Field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"nodes = {self.nodes}",
            f"min = {self.min_value:.17g}",
            f"max = {self.max_value:.17g}",
        ]
        lines += [f"{key} = {value:g}" for key, value in self.quadrature.items()]
        lines += [f"wrote {path}" for path in self.paths]
        return "\n".join(lines)


class ReconStats(BaseModel):
    method: str
    nodes: int
    denom_min: float
    path: Optional[Path] = None
    max_error: Optional[float] = Field(None, description="max |f_recon − f_true| when the truth is known")
    mean_error: Optional[float] = None


class InvertSummary(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    recons: Dict[str, Union[Recon1D, SliceRecon]] = Field(default_factory=dict)
    stats: List[ReconStats] = Field(default_factory=list)
    pairwise: Dict[str, float] = Field(default_factory=dict, description="'a/b' -> max |a − b|")
    hash_overridden: bool = False

    def to_text(self) -> str:
        lines = []
        for s in self.stats:
            line = f"{s.method:<14} nodes={s.nodes} denom_min={s.denom_min:.6g}"
            if s.max_error is not None:
                line += f" max_abs_err={s.max_error:.6e} mean_abs_err={s.mean_error:.6e}"
            lines.append(line)
        if self.pairwise:
            lines.append("pairwise max |difference|:")
            lines += [f"  {pair:<20} {value:.6e}" for pair, value in self.pairwise.items()]
        lines += [f"wrote {s.path}" for s in self.stats if s.path is not None]
        return "\n".join(lines)


class GaugeOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    report: GaugeReport
    annihilation: Annihilation
    field: ExprAST = Field(..., description="The generated kernel element")
    paths: List[Path] = Field(default_factory=list)


class VerifyCheck(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = Field(None, description="Worst measured residual")
    threshold: Optional[float] = None
    message: str = ""


class VerifySuite(BaseModel):
    checks: List[VerifyCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[VerifyCheck]:
        return next((c for c in self.checks if not c.passed), None)

    def to_text(self) -> str:
        lines = [f"{'check':<26} {'status':<6} {'value':>13} {'threshold':>13}"]
        for c in self.checks:
            value = "-" if c.value is None else f"{c.value:.6e}"
            threshold = "-" if c.threshold is None else f"{c.threshold:.6e}"
            line = f"{c.name:<26} {'pass' if c.passed else 'FAIL':<6} {value:>13} {threshold:>13}"
            if c.message:
                line += f"  {c.message}"
            lines.append(line)
        return "\n".join(lines)
