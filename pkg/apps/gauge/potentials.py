# apps/gauge/potentials.py
"""
Quadrature-backed potentials.

Every function here evaluates on whole point arrays: the integrals use a
fixed composite Gauss-Legendre rule so nested potentials stay vectorized.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import SceneIllFormed
from apps.scene import Box, ExtendedField
from apps.transform import gauss_legendre_nodes
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

ArrayField = Callable[..., np.ndarray]
DirectionField = Callable[..., Tuple[np.ndarray, ...]]

# integrand samples evaluated per batch
CHUNK_NODES = 1_000_000

# fourth-order central first derivative: (offset, weight)
STENCIL = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))


def field_array(field) -> ArrayField:
    """Vectorized view of an expression, a potential or a plain array callable."""
    return getattr(field, "evaluate_array", field)


def constant_direction(vector: Sequence[float]) -> DirectionField:
    vector = tuple(float(c) for c in vector)

    def direction(*coords: np.ndarray) -> Tuple[np.ndarray, ...]:
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        return tuple(np.full(shape, c) for c in vector)

    return direction


def extended_direction(field: ExtendedField) -> DirectionField:
    return field.evaluate_array


def _rule(length: float, nodes: Optional[int], panel_width: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
    settings = get_settings()
    nodes = nodes or settings.HEADWAVE_GL_NODES
    panel_width = panel_width or settings.HEADWAVE_GL_PANEL_WIDTH
    panels = max(1, math.ceil(length / panel_width))
    return gauss_legendre_nodes(0.0, 1.0, nodes, 1.0 / panels)


def clip_rays(box: Box, points: np.ndarray, directions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slab clipping of p + t·w, t ≥ 0, against a box, row by row.

    Rows that miss the box come back with t_in = t_out = 0.
    """
    n, dim = points.shape
    t_in = np.zeros(n)
    t_out = np.full(n, np.inf)
    for k in range(dim):
        p, w = points[:, k], directions[:, k]
        lo, hi = box.lower[k], box.upper[k]
        moving = w != 0.0
        inside = (p >= lo) & (p <= hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - p) / w
            t2 = (hi - p) / w
        enter = np.where(moving, np.minimum(t1, t2), np.where(inside, -np.inf, np.inf))
        leave = np.where(moving, np.maximum(t1, t2), np.where(inside, np.inf, -np.inf))
        t_in = np.maximum(t_in, enter)
        t_out = np.minimum(t_out, leave)
    empty = ~(t_out > t_in)
    t_in[empty] = 0.0
    t_out[empty] = 0.0
    return t_in, t_out


def segment_integrals(
    field: ArrayField,
    starts: np.ndarray,
    directions: np.ndarray,
    t0: np.ndarray,
    t1: np.ndarray,
    nodes: Optional[int] = None,
    panel_width: Optional[float] = None,
) -> np.ndarray:
    """∫_{t0}^{t1} field(p + t·w) dt for every row; t1 < t0 flips the sign."""
    lengths = t1 - t0
    result = np.zeros(starts.shape[0])
    active = np.flatnonzero(lengths != 0.0)
    if active.size == 0:
        return result
    if not np.all(np.isfinite(lengths[active])):
        raise SceneIllFormed("integration segment never leaves the support box")
    tau, weights = _rule(float(np.max(np.abs(lengths[active]))), nodes, panel_width)
    batch = max(1, CHUNK_NODES // tau.size)
    for begin in range(0, active.size, batch):
        rows = active[begin:begin + batch]
        t = t0[rows, None] + lengths[rows, None] * tau[None, :]
        coords = [starts[rows, k, None] + t * directions[rows, k, None] for k in range(starts.shape[1])]
        result[rows] = lengths[rows] * (field(*coords) @ weights)
    return result


def shadow_box(box: Box, directions: np.ndarray, floor: float = 0.0) -> Box:
    """
    Bounding box of every point at height ≥ floor whose ray along one of
    `directions` (last component > 0) reaches `box`.
    """
    lower = list(box.lower)
    upper = list(box.upper)
    last = box.dim - 1
    reach = box.upper[last] - floor
    for w in np.atleast_2d(directions):
        span = reach / w[last]
        for k in range(last):
            lower[k] = min(lower[k], box.lower[k] - span * max(w[k], 0.0))
            upper[k] = max(upper[k], box.upper[k] - span * min(w[k], 0.0))
    lower[last] = min(lower[last], floor)
    return Box(lower=tuple(lower), upper=tuple(upper))


def _flatten(coords: Sequence) -> Tuple[Tuple[int, ...], np.ndarray]:
    arrays = [np.asarray(c, dtype=float) for c in coords]
    shape = np.broadcast_shapes(*(a.shape for a in arrays))
    points = np.column_stack([np.broadcast_to(a, shape).ravel() for a in arrays])
    return shape, points


class RayPotential:
    """
    sign·∫_0^{reach(p)} f(p + t·w(p)) dt.

    Without `reach` the ray runs to infinity and is clipped to `box`, the
    region where f can be nonzero; with it the segment is finite and `box`
    is optional.
    """

    def __init__(
        self,
        field,
        direction: DirectionField,
        box: Optional[Box] = None,
        sign: float = 1.0,
        reach: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        nodes: Optional[int] = None,
        panel_width: Optional[float] = None,
    ):
        if box is None and reach is None:
            raise SceneIllFormed("an unbounded ray potential needs the support box of its integrand")
        self.field = field_array(field)
        self.direction = direction
        self.box = box
        self.sign = sign
        self.reach = reach
        self.nodes = nodes
        self.panel_width = panel_width

    def evaluate_array(self, *coords) -> np.ndarray:
        shape, points = _flatten(coords)
        directions = np.column_stack([
            np.broadcast_to(c, (points.shape[0],)) for c in self.direction(*points.T)
        ])
        if self.box is not None:
            t0, t1 = clip_rays(self.box, points, directions)
        else:
            t0, t1 = np.zeros(points.shape[0]), np.full(points.shape[0], np.inf)
        if self.reach is not None:
            limit = self.reach(points)
            t1 = np.minimum(t1, limit)
            t0 = np.minimum(t0, t1)
        values = segment_integrals(self.field, points, directions, t0, t1, self.nodes, self.panel_width)
        return (self.sign * values).reshape(shape)

    def __call__(self, *coords: float) -> float:
        return float(self.evaluate_array(*(np.array([c]) for c in coords))[0])


def foot_potential(field, vector: Sequence[float], box: Optional[Box] = None, **rule) -> RayPotential:
    """
    ∫ of f along w from the foot of p on {last coordinate = 0} up to p,
    i.e. ∫_0^{p_n/w_n} f(p − s·w) ds.
    """
    vector = np.asarray(vector, dtype=float)
    height = vector[-1]

    def reach(points: np.ndarray) -> np.ndarray:
        return np.maximum(points[:, -1], 0.0) / height

    return RayPotential(field, constant_direction(-vector), box=box, sign=1.0, reach=reach, **rule)


class OneForm:
    """
    ω = (v2ψ_v − u2ψ_u)dx + (u1ψ_u − v1ψ_v)dy with ψ_w = sign·∫_0^∞ f(p + t·w(p)) dt.
    """

    def __init__(self, field, box: Box, u: DirectionField, v: DirectionField, sign: float, **rule):
        self.u = u
        self.v = v
        self.psi_u = RayPotential(field, u, box=box, sign=sign, **rule)
        self.psi_v = RayPotential(field, v, box=box, sign=sign, **rule)

    def evaluate_array(self, xs, ys) -> Tuple[np.ndarray, np.ndarray]:
        xs, ys = np.broadcast_arrays(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
        u1, u2 = (np.broadcast_to(c, xs.shape) for c in self.u(xs, ys))
        v1, v2 = (np.broadcast_to(c, xs.shape) for c in self.v(xs, ys))
        pu = self.psi_u.evaluate_array(xs, ys)
        pv = self.psi_v.evaluate_array(xs, ys)
        return v2 * pv - u2 * pu, u1 * pu - v1 * pv

    def curl(self, xs, ys, h: float) -> np.ndarray:
        return curl_fd(self, xs, ys, h)


class StaircasePotential:
    """
    φ(p) = ∫ω along an axis-aligned path from `base` to p.

    The default path runs horizontally at the base height, then vertically;
    `vertical_first` swaps the legs.
    """

    def __init__(self, omega: OneForm, base: Sequence[float], vertical_first: bool = False, sign: float = 1.0,
                 **rule):
        self.omega = omega
        self.base = (float(base[0]), float(base[1]))
        self.vertical_first = vertical_first
        self.sign = sign
        self.rule = rule

    def _leg(self, component: int, starts: np.ndarray, axis: int, lengths: np.ndarray) -> np.ndarray:
        directions = np.zeros_like(starts)
        directions[:, axis] = 1.0

        def integrand(x, y):
            return self.omega.evaluate_array(x, y)[component]

        return segment_integrals(integrand, starts, directions, np.zeros(lengths.size), lengths, **self.rule)

    def evaluate_array(self, xs, ys) -> np.ndarray:
        shape, points = _flatten((xs, ys))
        x, y = points[:, 0], points[:, 1]
        xb, yb = self.base
        if not self.vertical_first:
            # the first leg only depends on x
            ux, inverse = np.unique(x, return_inverse=True)
            starts = np.column_stack((np.full(ux.size, xb), np.full(ux.size, yb)))
            first = self._leg(0, starts, 0, ux - xb)[inverse]
            second = self._leg(1, np.column_stack((x, np.full(x.size, yb))), 1, y - yb)
        else:
            uy, inverse = np.unique(y, return_inverse=True)
            starts = np.column_stack((np.full(uy.size, xb), np.full(uy.size, yb)))
            first = self._leg(1, starts, 1, uy - yb)[inverse]
            second = self._leg(0, np.column_stack((np.full(x.size, xb), y)), 0, x - xb)
        return (self.sign * (first + second)).reshape(shape)

    def __call__(self, x: float, y: float) -> float:
        return float(self.evaluate_array(np.array([x]), np.array([y]))[0])


# Finite differences

def _directions(direction, n: int, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(direction, dtype=float), (n, dim))


def directional_fd(func: ArrayField, points: np.ndarray, direction, h: float) -> np.ndarray:
    """
    Fourth-order central w·∇func at the rows of `points`.

    `direction` is one vector or one row per point; a point-dependent w
    gives the derivative along w(p) at p.
    """
    points = np.asarray(points, dtype=float)
    n, dim = points.shape
    w = _directions(direction, n, dim)
    shifted = np.vstack([points + offset * h * w for offset, _ in STENCIL])
    values = np.asarray(func(*shifted.T), dtype=float).reshape(len(STENCIL), n)
    weights = np.array([weight for _, weight in STENCIL])
    return weights @ values / h


def second_directional_fd(func: ArrayField, points: np.ndarray, outer, inner, h: float) -> np.ndarray:
    """outer·∇(inner·∇func) for constant directions, by nested stencils."""
    inner = np.asarray(inner, dtype=float)

    def first(*coords):
        return directional_fd(func, np.column_stack(coords), inner, h)

    return directional_fd(first, points, outer, h)


def curl_fd(omega, xs, ys, h: float) -> np.ndarray:
    """∂1ω2 − ∂2ω1 of a vectorized one-form on a lattice."""
    points = np.column_stack([np.ravel(xs), np.ravel(ys)])

    def second(x, y):
        return omega.evaluate_array(x, y)[1]

    def first(x, y):
        return omega.evaluate_array(x, y)[0]

    curl = directional_fd(second, points, (1.0, 0.0), h) - directional_fd(first, points, (0.0, 1.0), h)
    return curl.reshape(np.shape(xs))
