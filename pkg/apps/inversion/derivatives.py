# apps/inversion/derivatives.py
"""Finite differences of head wave data at d = 0."""

from __future__ import annotations

from typing import Callable, Optional, Sequence, Union

import numpy as np

from apps.core.exceptions import InsufficientGrid
from apps.inversion.schemas import DataDerivatives
from apps.transform import DataGrid
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

Forward = Callable[[float, float], float]
DataSource = Union[DataGrid, Forward]


def forward_difference(r0, r1, r2, h: float):
    """Second-order one-sided derivative (−3R0 + 4R1 − R2) / 2h."""
    return (-3.0 * np.asarray(r0) + 4.0 * np.asarray(r1) - np.asarray(r2)) / (2.0 * h)


def central_difference(values: np.ndarray, h: float) -> np.ndarray:
    """
    Fourth-order x derivative on a uniform axis: the 5-point central stencil inside,
    5-point one-sided stencils on the two outer nodes of each end.

    Fewer than 5 nodes fall back to second order.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 5:
        return np.gradient(values, h, edge_order=2)
    dx = np.empty_like(values)
    dx[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
    head, tail = values[:5], values[-5:]
    dx[0] = (-25.0 * head[0] + 48.0 * head[1] - 36.0 * head[2] + 16.0 * head[3] - 3.0 * head[4]) / (12.0 * h)
    dx[1] = (-3.0 * head[0] - 10.0 * head[1] + 18.0 * head[2] - 6.0 * head[3] + head[4]) / (12.0 * h)
    dx[-1] = (25.0 * tail[4] - 48.0 * tail[3] + 36.0 * tail[2] - 16.0 * tail[1] + 3.0 * tail[0]) / (12.0 * h)
    dx[-2] = (3.0 * tail[4] + 10.0 * tail[3] - 18.0 * tail[2] + 6.0 * tail[1] - tail[0]) / (12.0 * h)
    return dx


def grid_derivatives(grid: DataGrid) -> DataDerivatives:
    """
    Derivatives from sampled data: fourth-order central differences in x (one-cell spacing),
    the 3-point forward stencil in d.

    Raises:
        InsufficientGrid: fewer than 3 x nodes or a single d row
    """
    if grid.axis1.size < 3:
        raise InsufficientGrid("x derivatives need at least 3 grid nodes", nodes=int(grid.axis1.size))
    if grid.axis2.size < 2:
        raise InsufficientGrid("d derivatives need at least one row beyond d = 0")
    h_x, h_d = grid.step1, grid.step2
    dx = central_difference(grid.values[:, 0], h_x)
    if grid.axis2.size >= 3:
        dd = forward_difference(grid.values[:, 0], grid.values[:, 1], grid.values[:, 2], h_d)
    else:
        logger.warning("Only two d rows available, falling back to a first-order d difference")
        dd = (grid.values[:, 1] - grid.values[:, 0]) / h_d
    return DataDerivatives(axis=grid.axis1, dx=dx, dd=dd, step_x=h_x, step_d=h_d)


def callback_derivatives(forward: Forward, axis: Sequence[float], step: float) -> DataDerivatives:
    """Derivatives from direct forward evaluations at step `step`, independent of the node spacing."""
    axis = np.asarray(axis, dtype=float)
    dx = np.empty(axis.size)
    dd = np.empty(axis.size)
    for i, x in enumerate(axis):
        x = float(x)
        dx[i] = (forward(x + step, 0.0) - forward(x - step, 0.0)) / (2.0 * step)
        dd[i] = forward_difference(forward(x, 0.0), forward(x, step), forward(x, 2.0 * step), step)
    logger.debug(f"Differenced {axis.size} nodes by forward evaluation, step {step:.3g}")
    return DataDerivatives(axis=axis, dx=dx, dd=dd, step_x=step, step_d=step)


def data_derivatives(data: DataSource, axis: Optional[Sequence[float]] = None,
                     step: Optional[float] = None) -> DataDerivatives:
    """
    Dispatch on the data source.

    A callback needs `axis`; its step defaults to HEADWAVE_FD_REL_STEP times the axis width.
    """
    if isinstance(data, DataGrid):
        return grid_derivatives(data)
    if axis is None:
        raise InsufficientGrid("a forward callback needs reconstruction nodes")
    axis = np.asarray(axis, dtype=float)
    if step is None:
        width = float(axis[-1] - axis[0]) if axis.size > 1 else 1.0
        step = get_settings().HEADWAVE_FD_REL_STEP * width
    return callback_derivatives(data, axis, step)
