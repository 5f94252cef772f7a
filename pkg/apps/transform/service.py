# apps/transform/service.py
"""Forward head wave transforms: three-leg geometric quadrature and the reduced one-dimensional forms."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import singledispatch
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import (
    DomainError,
    HeadwaveError,
    InsufficientGrid,
    LegExitsTube,
    NodeEvaluationError,
    OutsideTube,
    SceneIllFormed,
)
from apps.metrics import record_forward
from apps.scene import Box, CurveScene, FieldMode, FlatScene2D, HyperplaneScene, Profile, clip_segment
from apps.transform.io import scene_hash
from apps.transform.quadrature import integrate
from apps.transform.schemas import DataGrid, ForwardMethod, LegValues, QuadratureOptions, is_uniform
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

Scene = Union[FlatScene2D, HyperplaneScene, CurveScene]

TUBE_MARCH = 32
EXIT_BISECTIONS = 40
EXIT_REL_TOL = 1e-12


def _check_d(d: float) -> None:
    if not (math.isfinite(d) and d >= 0.0):
        raise SceneIllFormed("glide length d must be finite and non-negative", d=d)


def _line_integral(
    field: Callable[..., float],
    box: Box,
    origin: Sequence[float],
    direction: Sequence[float],
    options: QuadratureOptions,
    leg: str,
    t_hi: float = math.inf,
) -> float:
    span = clip_segment(box, origin, direction, 0.0, t_hi)
    if span is None:
        return 0.0
    origin = tuple(float(o) for o in origin)
    direction = tuple(float(w) for w in direction)
    return integrate(
        lambda t: field(*[o + t * w for o, w in zip(origin, direction)]),
        span[0], span[1], options, leg,
    )


def profile_integral(profile: Profile, options: Optional[QuadratureOptions] = None) -> float:
    """∫f̃ over its support, or the supplied value."""
    if profile.total_integral is not None:
        return profile.total_integral
    a, b = profile.support
    return integrate(profile, a, b, options, "total")


def _reduced(
    profile: Profile,
    head_end: float,
    tail_start: float,
    glide: float,
    u1: float,
    v1: float,
    options: QuadratureOptions,
) -> float:
    a, b = profile.support
    head = integrate(profile, a, min(max(head_end, a), b), options, "descent")
    tail = integrate(profile, min(max(tail_start, a), b), b, options, "ascent")
    return -head / u1 + glide + tail / v1


# Flat 2D

def _flat_field(scene: FlatScene2D) -> Callable[[float, float], float]:
    if scene.profile is not None:
        profile = scene.profile
        return lambda x, y: profile(x)
    return scene.field2d


@singledispatch
def leg_integrals(scene, at, d: float, options: Optional[QuadratureOptions] = None, **kwargs) -> LegValues:
    """The descending, gliding and ascending integrals of one head wave value."""
    raise SceneIllFormed(f"unsupported scene type {type(scene).__name__}")


@leg_integrals.register
def _(scene: FlatScene2D, at: float, d: float, options: Optional[QuadratureOptions] = None) -> LegValues:
    _check_d(d)
    options = options or QuadratureOptions()
    u, v = scene.leg_directions(at, d)
    box = scene.support_box
    field = _flat_field(scene)
    return LegValues(
        descent=_line_integral(field, box, (at, 0.0), u, options, "descent"),
        glide=_line_integral(field, box, (at, 0.0), (1.0, 0.0), options, "glide", t_hi=d),
        ascent=_line_integral(field, box, (at + d, 0.0), v, options, "ascent"),
    )


def hwt_flat2d(scene: FlatScene2D, x: float, d: float, options: Optional[QuadratureOptions] = None) -> float:
    """
    Head wave transform by quadrature along the three legs.

    Legs are clipped to the support box, so improper integrals are exact
    for compactly supported f.
    """
    value = leg_integrals(scene, x, d, options).total
    record_forward("flat2d")
    return value


def _flat_reduced(scene: FlatScene2D, x: float, d: float, options: QuadratureOptions) -> float:
    if scene.profile is None:
        raise SceneIllFormed("the reduced transform needs a profile-mode scene")
    _check_d(d)
    profile = scene.profile
    a, b = profile.support
    glide = integrate(profile, min(max(x, a), b), min(max(x + d, a), b), options, "glide")
    return _reduced(profile, x, x + d, glide, scene.u1(x), scene.v1(x + d), options)


def hwt_flat2d_reduced(scene: FlatScene2D, x: float, d: float, options: Optional[QuadratureOptions] = None) -> float:
    """-(1/u1(x))∫_a^x f̃ + ∫_x^{x+d} f̃ + (1/v1(x+d))∫_{x+d}^b f̃."""
    value = _flat_reduced(scene, x, d, options or QuadratureOptions())
    record_forward("flat2d_reduced")
    return value


# Fixed direction on the hyperplane

def hwt_fixed_theta(
    scene: HyperplaneScene, at: Sequence[float], d: float, options: Optional[QuadratureOptions] = None
) -> float:
    """Reduced transform at x′ for the fixed direction θ0, evaluated on the slice through x′."""
    s, offset = scene.line_coordinates(at)
    value = _flat_reduced(scene.slice_scene(offset), s, d, options or QuadratureOptions())
    record_forward("fixed_theta")
    return value


@leg_integrals.register
def _(
    scene: HyperplaneScene,
    at: Sequence[float],
    d: float,
    options: Optional[QuadratureOptions] = None,
    theta: Optional[Sequence[float]] = None,
) -> LegValues:
    if scene.field3d is None:
        raise SceneIllFormed("geometric fixed-θ legs need a field-mode scene")
    _check_d(d)
    options = options or QuadratureOptions()
    theta = tuple(scene.theta0 if theta is None else theta)
    if abs(math.hypot(*theta) - 1.0) > 1e-12:
        raise SceneIllFormed("theta must be a unit vector", theta=list(theta))
    start = np.asarray(at, dtype=float)
    end = start + d * np.asarray(theta)
    u = scene.u_vector(start, theta)
    v = scene.v_vector(end, theta)
    return LegValues(
        descent=_line_integral(scene.field3d, scene.box, (*start, 0.0), u, options, "descent"),
        glide=_line_integral(scene.field3d, scene.box, (*start, 0.0), (*theta, 0.0), options, "glide", t_hi=d),
        ascent=_line_integral(scene.field3d, scene.box, (*end, 0.0), v, options, "ascent"),
    )


def hwt_fixed_theta_field(
    scene: HyperplaneScene,
    at: Sequence[float],
    d: float,
    theta: Optional[Sequence[float]] = None,
    options: Optional[QuadratureOptions] = None,
) -> float:
    """Full geometric transform of a field in R^3 for direction θ (θ0 by default)."""
    value = leg_integrals(scene, at, d, options, theta=theta).total
    record_forward("fixed_theta_field")
    return value


def line_integral(scene: HyperplaneScene, offset: float, options: Optional[QuadratureOptions] = None) -> float:
    """∫f̃(s·θ0 + offset·θ0⊥) ds along one line of the slicing."""
    return profile_integral(scene.slice_scene(offset).profile, options)


# Curve

def _tube_exit(scene: CurveScene, origin: np.ndarray, direction: np.ndarray) -> float:
    geometry, radius = scene.geometry, scene.tube_radius

    def inside(r: float) -> bool:
        try:
            geometry.project(origin + r * direction, radius)
        except OutsideTube:
            return False
        return True

    step = radius / TUBE_MARCH
    longest = (geometry.s_max - geometry.s_min) + 4.0 * radius
    r = 0.0
    while inside(r + step):
        r += step
        if r > longest:
            raise LegExitsTube("leg never leaves the tubular neighborhood", origin=origin.tolist())
    lo, hi = r, r + step
    for _ in range(EXIT_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _tube_leg(scene: CurveScene, origin: np.ndarray, direction: np.ndarray,
              options: QuadratureOptions, leg: str) -> float:
    r_exit = _tube_exit(scene, origin, direction)
    exit_point = origin + r_exit * direction
    exit_value = scene.field_value(*exit_point)
    if abs(exit_value) > EXIT_REL_TOL * scene.profile.peak:
        logger.error(f"Leg '{leg}' leaves the tube at {exit_point.tolist()} where f = {exit_value:.3e}")
        raise LegExitsTube(
            "leg leaves the tubular neighborhood while f is nonzero",
            leg=leg, exit_point=exit_point.tolist(), value=exit_value,
        )
    return integrate(lambda r: scene.field_value(*(origin + r * direction)), 0.0, r_exit, options, leg)


def _glide_parameters(scene: CurveScene, s0: float, d: float) -> Tuple[float, float]:
    _check_d(d)
    return scene.parameter_at(s0), scene.parameter_at(s0 + d)


@leg_integrals.register
def _(scene: CurveScene, at: float, d: float, options: Optional[QuadratureOptions] = None) -> LegValues:
    options = options or QuadratureOptions()
    geometry = scene.geometry
    t0, t1 = _glide_parameters(scene, at, d)
    start, end = geometry.frame(t0), geometry.frame(t1)
    if scene.mode is FieldMode.FIELD:
        descent = _line_integral(scene.field2d, scene.box, start.position, start.u, options, "descent")
        ascent = _line_integral(scene.field2d, scene.box, end.position, end.v, options, "ascent")
        glide = integrate(
            lambda t: scene.field_value(*geometry.point(t)) * geometry.speed(t), t0, t1, options, "glide"
        )
    else:
        descent = _tube_leg(scene, start.position, start.u, options, "descent")
        ascent = _tube_leg(scene, end.position, end.v, options, "ascent")
        profile = scene.profile
        glide = integrate(lambda t: profile(geometry.gamma1(t)) * geometry.speed(t), t0, t1, options, "glide")
    return LegValues(descent=descent, glide=glide, ascent=ascent)


def hwt_curve(scene: CurveScene, s0: float, d: float, options: Optional[QuadratureOptions] = None) -> float:
    """
    γ-head wave transform by quadrature along straight legs and the curve.

    In profile mode f(p) = f̃(p·e(p)) with e the unit tangent at the nearest curve point.

    Raises:
        LegExitsTube: a leg leaves the tube while f is still nonzero
        OutsideTube: [s0, s0 + d] is not inside the curve's arc-length range
    """
    value = leg_integrals(scene, s0, d, options).total
    record_forward("curve")
    return value


def _curve_reduced(scene: CurveScene, s0: float, d: float, options: QuadratureOptions) -> float:
    if scene.profile is None:
        raise SceneIllFormed("the reduced curve transform needs a profile-mode scene")
    geometry = scene.geometry
    t0, t1 = _glide_parameters(scene, s0, d)
    start, end = geometry.frame(t0), geometry.frame(t1)
    profile = scene.profile
    glide = integrate(lambda t: profile(geometry.gamma1(t)) * geometry.speed(t), t0, t1, options, "glide")
    return _reduced(profile, start.gamma1, end.gamma1, glide, start.u1, end.v1, options)


def hwt_curve_reduced(scene: CurveScene, s0: float, d: float, options: Optional[QuadratureOptions] = None) -> float:
    """-(1/u1(s0))∫_a^{γ1(s0)} f̃ + ∫_{s0}^{s0+d} f̃(γ1) + (1/v1(s0+d))∫_{γ1(s0+d)}^b f̃."""
    value = _curve_reduced(scene, s0, d, options or QuadratureOptions())
    record_forward("curve_reduced")
    return value


# Sweeps

def forward_evaluator(
    scene: Scene,
    method: ForwardMethod = ForwardMethod.AUTO,
    options: Optional[QuadratureOptions] = None,
    offset: float = 0.0,
    theta: Optional[Sequence[float]] = None,
) -> Callable[[float, float], float]:
    """
    The forward operation a sweep evaluates at each (axis1, d) node.

    AUTO picks the reduced form in profile mode and the geometric form in field mode.
    Hyperplane nodes lie on the line s·θ0 + offset·θ0⊥.
    """
    options = options or QuadratureOptions()
    method = ForwardMethod(method)
    reduced = method is ForwardMethod.REDUCED or (method is ForwardMethod.AUTO and scene.mode is FieldMode.PROFILE)
    if reduced and scene.mode is FieldMode.FIELD:
        raise SceneIllFormed("reduced forward evaluation needs a profile-mode scene")

    if isinstance(scene, FlatScene2D):
        if reduced:
            return lambda x, d: hwt_flat2d_reduced(scene, x, d, options)
        return lambda x, d: hwt_flat2d(scene, x, d, options)
    if isinstance(scene, HyperplaneScene):
        if scene.mode is FieldMode.PROFILE:
            if method is ForwardMethod.GEOMETRIC:
                raise SceneIllFormed("profile-mode hyperplane scenes only have the reduced form")
            return lambda s, d: hwt_fixed_theta(scene, scene.line_point(s, offset), d, options)
        return lambda s, d: hwt_fixed_theta_field(scene, scene.line_point(s, offset), d, theta, options)
    if isinstance(scene, CurveScene):
        if reduced:
            return lambda s, d: hwt_curve_reduced(scene, s, d, options)
        return lambda s, d: hwt_curve(scene, s, d, options)
    raise SceneIllFormed(f"unsupported scene type {type(scene).__name__}")


def _worker_count(threads: Optional[int]) -> int:
    if threads:
        return threads
    return get_settings().HEADWAVE_THREADS or os.cpu_count() or 1


def sweep(
    scene: Scene,
    axis1: Sequence[float],
    axis2: Sequence[float],
    options: Optional[QuadratureOptions] = None,
    method: ForwardMethod = ForwardMethod.AUTO,
    threads: Optional[int] = None,
    offset: float = 0.0,
    theta: Optional[Sequence[float]] = None,
    evaluator: Optional[Callable[[float, float], float]] = None,
) -> DataGrid:
    """
    Evaluate the forward transform on every node of a uniform (axis1, d) grid.

    Nodes are evaluated concurrently; each result lands in its own slot, so the
    grid does not depend on scheduling.

    Raises:
        InsufficientGrid: axes not uniform or d not starting at 0
        NodeEvaluationError: an expression failed at a node (coordinates attached)
    """
    options = options or QuadratureOptions()
    axis1 = np.asarray(axis1, dtype=float)
    axis2 = np.asarray(axis2, dtype=float)
    if axis2.size == 0 or axis2[0] != 0.0:
        raise InsufficientGrid("d grid must start at 0")
    if not (is_uniform(axis1) and is_uniform(axis2)):
        raise InsufficientGrid("sweep grids must be uniform")
    evaluate = evaluator or forward_evaluator(scene, method, options, offset, theta)

    def node(index: Tuple[int, int]) -> float:
        x, d = float(axis1[index[0]]), float(axis2[index[1]])
        try:
            return evaluate(x, d)
        except DomainError as exc:
            logger.error(f"Expression failed at node x={x}, d={d}: {exc}")
            raise NodeEvaluationError("expression failed at a grid node", x=x, d=d, op=exc.op) from exc
        except HeadwaveError as exc:
            exc.details.setdefault("x", x)
            exc.details.setdefault("d", d)
            raise

    nodes = [(i, j) for i in range(axis1.size) for j in range(axis2.size)]
    workers = _worker_count(threads)
    logger.info(f"Sweeping {scene.kind} scene on a {axis1.size}x{axis2.size} grid ({workers} workers)")
    if workers == 1:
        results = [node(ij) for ij in nodes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(node, nodes))
    values = np.array(results, dtype=float).reshape(axis1.size, axis2.size)
    logger.info(f"Sweep finished: values in [{values.min():.6g}, {values.max():.6g}]")
    return DataGrid(axis1=axis1, axis2=axis2, values=values, scene_hash=scene_hash(scene), quad_tol=options.abs_tol)


def sweep_lines(
    scene: HyperplaneScene,
    offsets: Sequence[float],
    axis1: Sequence[float],
    axis2: Sequence[float],
    options: Optional[QuadratureOptions] = None,
    threads: Optional[int] = None,
    theta: Optional[Sequence[float]] = None,
) -> Dict[float, DataGrid]:
    """One DataGrid per line s·θ0 + offset·θ0⊥, keyed by offset."""
    grids = {}
    for offset in offsets:
        logger.debug(f"Sweeping line at offset {offset}")
        grids[float(offset)] = sweep(scene, axis1, axis2, options, threads=threads, offset=float(offset), theta=theta)
    return grids
