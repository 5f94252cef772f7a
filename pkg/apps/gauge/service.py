# apps/gauge/service.py
"""Kernel generators, potentials of null functions and their residual checks."""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import (
    BoundaryNonvanishing,
    DivConditionViolated,
    ExtensionNotStraight,
    HConditionViolated,
    NotClosed,
    NotNull,
    SceneIllFormed,
    SingularFrame,
)
from apps.expr import ExprAST, constant, derivative, directional_derivative, lift, rename, simplify
from apps.expr.service import mk_div
from apps.gauge.potentials import (
    OneForm,
    RayPotential,
    StaircasePotential,
    constant_direction,
    directional_fd,
    extended_direction,
    foot_potential,
    second_directional_fd,
    shadow_box,
)
from apps.gauge.schemas import BOUNDARY_TOL, CLOSED_TOL, FORWARD_TOL, Annihilation, GaugeReport, GeneralGauge
from apps.metrics import record_gauge_check
from apps.scene import Box, CurveScene, ExtendedField, FieldMode, FlatScene2D, HyperplaneScene, det_frame
from apps.transform import DataGrid, ForwardMethod, QuadratureOptions, sweep
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

FieldScene = Union[FlatScene2D, CurveScene]

VANISH_TOL = 1e-10
H_TOL = 1e-12
STRAIGHT_TOL = 1e-9
SINGULAR_TOL = 1e-9
EXTENSION_TOL = 1e-9
NULL_TOL = 1e-7
SUPPORT_MARGIN = 1e-6

# lattice sizes
FRAME_POINTS = 64
GLIDE_POINTS = 64
VERIFY_POINTS = 3
PATH_POINTS = 100
SPOT_GRID = (5, 3)


def _unit(vector: Sequence[float], role: str) -> np.ndarray:
    w = np.asarray(vector, dtype=float)
    if w.shape != (2,) or abs(math.hypot(*w) - 1.0) > 1e-12 or w[1] <= 0.0:
        raise SceneIllFormed(f"{role} must be a unit vector pointing into y > 0", role=role, vector=w.tolist())
    return w


def _fd_step(box: Box) -> float:
    return get_settings().HEADWAVE_GAUGE_FD_REL_STEP * max(box.widths())


def _interior(box: Box, points: int) -> np.ndarray:
    """Lattice strictly inside the box, one row per point."""
    fractions = np.arange(1, points + 1) / (points + 1)
    axes = [lo + fractions * (hi - lo) for lo, hi in zip(box.lower, box.upper)]
    return np.column_stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")])


def _worst(values: np.ndarray, points: np.ndarray) -> Tuple[float, List[float]]:
    values = np.abs(np.asarray(values, dtype=float)).ravel()
    if values.size == 0:
        return 0.0, []
    k = int(np.argmax(values))
    return float(values[k]), [float(c) for c in points[k]]


def _check_boundary(phi: ExprAST, box: Box) -> None:
    """φ on the gliding plane {last coordinate = 0}, over the box's other axes."""
    points = FRAME_POINTS if box.dim > 2 else get_settings().HEADWAVE_LATTICE_POINTS
    axes = [np.linspace(lo, hi, points) for lo, hi in zip(box.lower[:-1], box.upper[:-1])]
    grids = np.meshgrid(*axes, indexing="ij")
    coords = [g.ravel() for g in grids] + [np.zeros(grids[0].size)]
    worst, at = _worst(phi.evaluate_array(*coords), np.column_stack(coords))
    if worst > VANISH_TOL:
        logger.error(f"φ does not vanish on the gliding set: |φ| = {worst:.3e} at {at}")
        record_gauge_check("boundary", False)
        raise BoundaryNonvanishing("φ does not vanish on the gliding set", residual=worst, point=at)


# Constant fields

def flat_null_scene(field: ExprAST, box: Box, u0: Sequence[float], v0: Sequence[float]) -> FlatScene2D:
    """Field-mode flat scene with constant leg directions, for forward sweeps of a kernel element."""
    return FlatScene2D(
        u1=constant(float(u0[0]), ("x",)),
        v1=constant(float(v0[0]), ("x",)),
        field2d=field,
        box=box,
    )


def gauge_forward_constant(phi: ExprAST, u0: Sequence[float], v0: Sequence[float], box: Box) -> ExprAST:
    """
    f = ∇_{u0}∇_{v0}φ, exactly.

    Raises:
        BoundaryNonvanishing: φ(x, 0) ≠ 0 somewhere on the box's x range
    """
    u0, v0 = _unit(u0, "u0"), _unit(v0, "v0")
    _check_boundary(phi, box)
    field = simplify(directional_derivative(directional_derivative(phi, v0), u0))
    logger.debug(f"Generated constant-field kernel element from φ over {list(phi.variables)}")
    return field


def _spot_axes(lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    n1, n2 = SPOT_GRID
    return np.linspace(lo, hi, n1), np.linspace(0.0, 0.5 * (hi - lo), n2)


def _spot_check(scene, axis1: np.ndarray, axis2: np.ndarray, options: Optional[QuadratureOptions],
                tol: float) -> float:
    grid = sweep(scene, axis1, axis2, options, ForwardMethod.GEOMETRIC, threads=1)
    i, j = np.unravel_index(int(np.argmax(np.abs(grid.values))), grid.shape)
    residual = float(abs(grid.values[i, j]))
    if residual > tol:
        logger.error(f"Claimed null function has R f = {residual:.3e} at ({axis1[i]}, {axis2[j]})")
        record_gauge_check("null", False)
        raise NotNull("forward transform does not vanish", witness=[float(axis1[i]), float(axis2[j])],
                      residual=residual)
    return residual


def _check_gliding(values: np.ndarray, points: np.ndarray, tol: float) -> None:
    worst, at = _worst(values, points)
    if worst > tol:
        record_gauge_check("null", False)
        raise NotNull("f does not vanish on the gliding set", witness=at, residual=worst)


def potentials_from_null_constant(
    f: ExprAST,
    u0: Sequence[float],
    v0: Sequence[float],
    box: Box,
    options: Optional[QuadratureOptions] = None,
    tol: float = NULL_TOL,
) -> Tuple[RayPotential, RayPotential]:
    """
    ψ(p) = ∫_0^{y/u2} f(p − s·u0) ds and φ(p) = ∫_0^{y/v2} ψ(p − s·v0) ds.

    Both vanish on y = 0 and ∇_{u0}∇_{v0}φ = ∇_{u0}ψ = f wherever they are
    evaluated; compact support of φ is what nullity of f buys.

    Raises:
        NotNull: f(x, 0) ≠ 0, or R f fails on the spot grid
    """
    u0, v0 = _unit(u0, "u0"), _unit(v0, "v0")
    xs = np.linspace(box.lower[0], box.upper[0], get_settings().HEADWAVE_LATTICE_POINTS)
    _check_gliding(f.evaluate_array(xs, np.zeros_like(xs)), np.column_stack((xs, np.zeros_like(xs))), tol)
    _spot_check(flat_null_scene(f, box, u0, v0), *_spot_axes(*box.interval(0)), options, tol)
    psi = foot_potential(f, u0, box=box)
    phi = foot_potential(psi, v0)
    record_gauge_check("null", True)
    return psi, phi


def constant_contract(
    f: ExprAST,
    psi: RayPotential,
    phi: RayPotential,
    u0: Sequence[float],
    v0: Sequence[float],
    box: Box,
    points: int = VERIFY_POINTS,
) -> Dict[str, float]:
    """Finite-difference residuals of ∇_uψ = f, ∇_u∇_vφ = f, ∇_v∇_uφ = f and the boundary values of ψ and φ."""
    residuals = _contract(f, psi, phi, u0, v0, box, points)
    xs = np.linspace(*box.interval(0), 4 * points)
    zeros = np.zeros_like(xs)
    residuals["psi_boundary"] = float(np.max(np.abs(psi.evaluate_array(xs, zeros))))
    residuals["phi_boundary"] = float(np.max(np.abs(phi.evaluate_array(xs, zeros))))
    return residuals


def _contract(f: ExprAST, psi: RayPotential, phi: RayPotential, u, v, box: Box, points: int) -> Dict[str, float]:
    lattice = _interior(box, points)
    h = _fd_step(box)
    target = f.evaluate_array(*lattice.T)

    def gap(values: np.ndarray) -> float:
        return float(np.max(np.abs(values - target)))

    return {
        "psi": gap(directional_fd(psi.evaluate_array, lattice, u, h)),
        "phi": gap(second_directional_fd(phi.evaluate_array, lattice, u, v, h)),
        "phi_swapped": gap(second_directional_fd(phi.evaluate_array, lattice, v, u, h)),
    }


# General fields

def _check_frame(u_ext: ExtendedField, v_ext: ExtendedField, box: Box) -> ExprAST:
    """Straightness, unit length and a nonsingular frame on the box; returns det A."""
    xs, ys = np.meshgrid(*box.axes(FRAME_POINTS), indexing="ij")
    lattice = np.column_stack((xs.ravel(), ys.ravel()))
    for name, w in (("u", u_ext), ("v", v_ext)):
        bend, norm = w.check_straight(xs, ys)
        worst, at = _worst(np.maximum(bend, norm), lattice)
        if worst > STRAIGHT_TOL:
            logger.error(f"Extension of {name} is not a straight unit field: residual {worst:.3e} at {at}")
            raise ExtensionNotStraight(f"extension of {name} does not have straight unit integral curves",
                                       field=name, residual=worst, point=at)
    det = det_frame(u_ext, v_ext)
    values = np.broadcast_to(det.evaluate_array(xs, ys), xs.shape)
    k = int(np.argmin(np.abs(values)))
    if abs(values.flat[k]) < SINGULAR_TOL:
        raise SingularFrame("det(u, v) vanishes", det=float(values.flat[k]), point=[float(c) for c in lattice[k]])
    return det


def _divide(ast: ExprAST, by: ExprAST) -> ExprAST:
    return ExprAST(mk_div(ast.root, by.root), ast.variables)


def gauge_forward_general(phi: ExprAST, u_ext: ExtendedField, v_ext: ExtendedField, box: Box) -> GeneralGauge:
    """
    f = P_u[det(A)^{-1} P_v φ] and the swapped ordering P_v[det(A)^{-1} P_u φ].

    Raises:
        ExtensionNotStraight: an extension bends or leaves unit length on the box
        SingularFrame: |det A| < 1e-9 on the box
        BoundaryNonvanishing: φ(x, 0) ≠ 0
    """
    det = _check_frame(u_ext, v_ext, box)
    _check_boundary(phi, box)
    field = simplify(u_ext.apply(_divide(v_ext.apply(phi), det)))
    swapped = simplify(v_ext.apply(_divide(u_ext.apply(phi), det)))
    xs, ys = np.meshgrid(*box.axes(FRAME_POINTS), indexing="ij")
    gap = float(np.max(np.abs(field.evaluate_array(xs, ys) - swapped.evaluate_array(xs, ys))))
    logger.info(f"General kernel element generated, ordering gap {gap:.3e}")
    return GeneralGauge(field=field, swapped=swapped, ordering_gap=gap)


def check_div_condition(
    f: ExprAST,
    u_ext: ExtendedField,
    v_ext: ExtendedField,
    box: Box,
    points: int = 21,
    domain: Optional[Box] = None,
) -> float:
    """
    max |div u·∫_0^∞ f(p + t·u(p)) dt − div v·∫_0^∞ f(p + t·v(p)) dt| on a lattice.

    `box` bounds the support of f; the lattice covers `domain`, by default
    the box extended down to y = 0.
    """
    if u_ext.is_constant and v_ext.is_constant:
        return 0.0
    domain = domain or Box(lower=(box.lower[0], min(0.0, box.lower[1])), upper=box.upper)
    xs, ys = np.meshgrid(*domain.axes(points), indexing="ij")
    psi_u = RayPotential(f, extended_direction(u_ext), box=box).evaluate_array(xs, ys)
    psi_v = RayPotential(f, extended_direction(v_ext), box=box).evaluate_array(xs, ys)
    residual = u_ext.divergence.evaluate_array(xs, ys) * psi_u - v_ext.divergence.evaluate_array(xs, ys) * psi_v
    worst = float(np.max(np.abs(residual)))
    logger.debug(f"Divergence condition residual {worst:.3e} on a {points}x{points} lattice")
    return worst


def _null_axes(scene: FieldScene) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(scene, FlatScene2D):
        return _spot_axes(*scene.box.interval(0))
    lo, hi = scene.s_range
    axis1, axis2 = _spot_axes(lo, lo + 0.5 * (hi - lo))
    return axis1, axis2


def _gliding_points(scene: FieldScene, samples: int = GLIDE_POINTS) -> np.ndarray:
    if isinstance(scene, FlatScene2D):
        xs = np.linspace(*scene.box.interval(0), samples)
        return np.column_stack((xs, np.zeros_like(xs)))
    lo, hi = scene.s_range
    ts = np.array([scene.parameter_at(s) for s in np.linspace(lo, hi, samples)])
    frames = scene.geometry.frames(ts)
    return np.column_stack((frames["x"], frames["y"]))


def _field_on(scene: FieldScene, points: np.ndarray) -> np.ndarray:
    box = scene.box
    inside = np.all((points >= np.asarray(box.lower)) & (points <= np.asarray(box.upper)), axis=1)
    values = np.zeros(points.shape[0])
    if inside.any():
        values[inside] = scene.field2d.evaluate_array(points[inside, 0], points[inside, 1])
    return values


def _check_extension(scene: FlatScene2D) -> None:
    """u_ext and v_ext must restrict to u and v on the line."""
    xs = np.linspace(*scene.box.interval(0), FRAME_POINTS)
    zeros = np.zeros_like(xs)
    for name, ext, first in (("u", scene.u_ext, scene.u1), ("v", scene.v_ext, scene.v1)):
        w1, w2 = (np.broadcast_to(c, xs.shape) for c in ext.evaluate_array(xs, zeros))
        c1 = np.broadcast_to(first.evaluate_array(xs), xs.shape)
        gap = float(np.max(np.hypot(w1 - c1, w2 - np.sqrt(np.clip(1.0 - c1 * c1, 0.0, None)))))
        if gap > EXTENSION_TOL:
            raise SceneIllFormed(f"{name}_ext does not extend {name} off the line", field=name, gap=gap)


def _pde_residuals(phi, f: ExprAST, u_ext: ExtendedField, v_ext: ExtendedField, det: ExprAST,
                   points: np.ndarray, h: float) -> Tuple[float, float, float]:
    """FD residuals of P_u[det^{-1}P_v φ] = f and P_v[det^{-1}P_u φ] = f, plus their mutual gap."""
    u = np.column_stack(u_ext.evaluate_array(points[:, 0], points[:, 1]))
    v = np.column_stack(v_ext.evaluate_array(points[:, 0], points[:, 1]))

    def scaled(direction: ExtendedField):
        def g(x, y):
            stencil = np.column_stack((np.ravel(x), np.ravel(y)))
            w = np.column_stack(direction.evaluate_array(stencil[:, 0], stencil[:, 1]))
            return directional_fd(phi.evaluate_array, stencil, w, h) / det.evaluate_array(stencil[:, 0],
                                                                                          stencil[:, 1])
        return g

    uv = directional_fd(scaled(v_ext), points, u, h)
    vu = directional_fd(scaled(u_ext), points, v, h)
    target = f.evaluate_array(points[:, 0], points[:, 1])
    return (
        float(np.max(np.abs(uv - target))),
        float(np.max(np.abs(vu - target))),
        float(np.max(np.abs(uv - vu))),
    )


def potential_from_null_general(
    scene: FieldScene,
    options: Optional[QuadratureOptions] = None,
    points: int = VERIFY_POINTS,
    path_points: int = PATH_POINTS,
    tol: float = NULL_TOL,
    closedness_step: Optional[float] = None,
) -> Tuple[StaircasePotential, GaugeReport]:
    """
    Potential φ with P_u[det^{-1}P_v φ] = f = P_v[det^{-1}P_u φ] for a null f.

    f, its support box and the extended fields come from the field-mode
    scene. ψ_u, ψ_v integrate f along the extended fields (−∫ on the flat
    line, +∫ along a curve), ω is assembled from them and integrated from a
    point of the gliding set along right-then-up staircases; the curve
    potential carries a minus sign so both identities hold with +f.

    Raises:
        DivConditionViolated: the divergence compatibility residual exceeds `tol`
        NotNull: f is nonzero on the gliding set or R f fails on the spot grid
        NotClosed: curl ω exceeds its threshold
    """
    if scene.mode is not FieldMode.FIELD or scene.u_ext is None:
        raise SceneIllFormed("the general gauge needs a field-mode scene with extended fields")
    f, box, u_ext, v_ext = scene.field2d, scene.box, scene.u_ext, scene.v_ext
    curve = isinstance(scene, CurveScene)
    if not curve:
        if box.lower[1] < SUPPORT_MARGIN:
            raise SceneIllFormed("support box of f must lie in y > 0", lower=list(box.lower))
        _check_extension(scene)
    det = _check_frame(u_ext, v_ext, box)

    gliding = _gliding_points(scene)
    _check_gliding(_field_on(scene, gliding), gliding, tol)
    div_residual = check_div_condition(f, u_ext, v_ext, box)
    if div_residual > tol:
        record_gauge_check("general", False)
        raise DivConditionViolated("f violates the divergence compatibility condition", residual=div_residual)
    forward = _spot_check(scene, *_null_axes(scene), options, tol)

    sign = 1.0 if curve else -1.0
    omega = OneForm(f, box, extended_direction(u_ext), extended_direction(v_ext), sign)
    base = scene.position(scene.s_range[0]) if curve else (box.lower[0], 0.0)
    phi = StaircasePotential(omega, base, sign=-sign)
    other = StaircasePotential(omega, base, vertical_first=True, sign=-sign)

    h = closedness_step or _fd_step(box)
    lattice = _interior(box, points)
    closed = float(np.max(np.abs(omega.curl(lattice[:, 0], lattice[:, 1], h))))
    if closed > CLOSED_TOL:
        record_gauge_check("general", False)
        raise NotClosed("ω is not closed", residual=closed)

    uv, vu, gap = _pde_residuals(phi, f, u_ext, v_ext, det, lattice, _fd_step(box))
    boundary = float(np.max(np.abs(phi.evaluate_array(gliding[:, 0], gliding[:, 1]))))
    rng = np.random.default_rng(0)
    samples = rng.uniform(box.lower, box.upper, size=(path_points, 2))
    path = float(np.max(np.abs(phi.evaluate_array(samples[:, 0], samples[:, 1])
                               - other.evaluate_array(samples[:, 0], samples[:, 1]))))

    report = GaugeReport(
        kind="general-curve" if curve else "general-flat",
        max_forward_residual=forward,
        closedness_residual=closed,
        pde_residuals=(uv, vu),
        boundary_residual=boundary,
        ordering_gap=gap,
        path_discrepancy=path,
    )
    record_gauge_check("general", not report.exceeded())
    logger.info(f"Recovered potential ({report.kind}): pde {uv:.2e}/{vu:.2e}, path {path:.2e}")
    return phi, report


# Fixed direction on the hyperplane

def hyperplane_null_scene(scene: HyperplaneScene, field: ExprAST, box: Optional[Box] = None) -> HyperplaneScene:
    """Field-mode copy of `scene` carrying a kernel element."""
    box = box or scene.box
    if box is None:
        raise SceneIllFormed("a 3D support box is needed for the kernel element")
    return HyperplaneScene(
        lambda_u=scene.lambda_u,
        lambda_v=scene.lambda_v,
        theta0=scene.theta0,
        field3d=field,
        box=box,
        domain=scene.domain,
    )


def _sweep_axes(box: Box) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = box.interval(0)
    quarter = 0.25 * (hi - lo)
    return np.linspace(lo + quarter, hi - quarter, 5), np.linspace(0.0, quarter, 3)


def _fixed_vectors(scene: HyperplaneScene) -> Tuple[np.ndarray, np.ndarray]:
    if not (scene.lambda_u.is_constant and scene.lambda_v.is_constant):
        raise SceneIllFormed("the fixed-θ gauge needs λ_u and λ_v independent of x′")
    return scene.u_vector((0.0, 0.0)), scene.v_vector((0.0, 0.0))


def gauge_fixed_theta(
    phi: ExprAST,
    scene: HyperplaneScene,
    box: Optional[Box] = None,
    axis1: Optional[Sequence[float]] = None,
    axis2: Optional[Sequence[float]] = None,
    offsets: Sequence[float] = (0.0,),
    options: Optional[QuadratureOptions] = None,
) -> Tuple[ExprAST, Annihilation]:
    """
    f = ∇_{u(θ0)}∇_{v(θ0)}φ and its annihilation sweep at θ0.

    Raises:
        BoundaryNonvanishing: φ(x′, 0) ≠ 0 on the box
    """
    if phi.variables != ("x1", "x2", "x3"):
        raise SceneIllFormed("φ must be declared over (x1, x2, x3)", declared=list(phi.variables))
    u, v = _fixed_vectors(scene)
    box = box or scene.box
    if box is None:
        raise SceneIllFormed("a 3D support box is needed for the kernel element")
    _check_boundary(phi, box)
    field = simplify(directional_derivative(directional_derivative(phi, v), u))
    null = hyperplane_null_scene(scene, field, box)
    default1, default2 = _sweep_axes(null.box)
    annihilation = verify_annihilation(
        null,
        default1 if axis1 is None else axis1,
        default2 if axis2 is None else axis2,
        options,
        offsets=offsets,
        kind="fixed-theta",
    )
    return field, annihilation


def potentials_fixed_theta(
    f: ExprAST, scene: HyperplaneScene, box: Optional[Box] = None, floor: Optional[float] = None
) -> Tuple[RayPotential, RayPotential]:
    """
    ψ = −∫_0^∞ f(x + t·u) dt and φ = −∫_0^∞ ψ(x + t·v) dt for the constant θ0 legs.

    ∇_vφ = ψ and ∇_uψ = f hold at every point with x3 ≥ floor (one below the box by default).
    """
    u, v = _fixed_vectors(scene)
    box = box or scene.box
    if box is None:
        raise SceneIllFormed("a 3D support box is needed for the potentials")
    floor = min(0.0, box.lower[-1]) - 1.0 if floor is None else floor
    psi = RayPotential(f, constant_direction(u), box=box, sign=-1.0)
    phi = RayPotential(psi, constant_direction(v), box=shadow_box(box, u[None, :], floor), sign=-1.0)
    return psi, phi


def fixed_theta_contract(
    f: ExprAST,
    psi: RayPotential,
    phi: RayPotential,
    scene: HyperplaneScene,
    box: Optional[Box] = None,
    points: int = VERIFY_POINTS,
) -> Dict[str, float]:
    """Finite-difference residuals of ∇_uψ = f and both orderings of ∇_u∇_vφ = f inside the box."""
    u, v = _fixed_vectors(scene)
    box = box or scene.box
    if box is None:
        raise SceneIllFormed("a 3D support box is needed for the residual lattice")
    return _contract(f, psi, phi, u, v, box, points)


def depth_null_generator(
    h: ExprAST,
    scene: HyperplaneScene,
    box: Optional[Box] = None,
    axis1: Optional[Sequence[float]] = None,
    axis2: Optional[Sequence[float]] = None,
    thetas: Optional[Sequence[Sequence[float]]] = None,
    offsets: Sequence[float] = (0.0,),
    options: Optional[QuadratureOptions] = None,
) -> Tuple[ExprAST, Annihilation]:
    """
    g(x′, x3) = h′(x3), null for every θ once h(0) = h′(0) = 0 and h decays.

    The sweep runs over θ0 and its rotations by ±π/4 unless `thetas` is given.

    Raises:
        HConditionViolated: h(0) or h′(0) above 1e-12, or h not decayed at the box top
    """
    if len(h.variables) != 1:
        raise SceneIllFormed("h must be an expression in one variable", declared=list(h.variables))
    name = h.variables[0]
    dh = derivative(h, name)
    h0, dh0 = h(0.0), dh(0.0)
    if abs(h0) > H_TOL or abs(dh0) > H_TOL:
        logger.error(f"Depth profile fails h(0) = h'(0) = 0: h(0) = {h0:.3e}, h'(0) = {dh0:.3e}")
        record_gauge_check("depth", False)
        raise HConditionViolated("h(0) and h'(0) must vanish", h0=h0, dh0=dh0)
    box = box or scene.box
    if box is None:
        raise SceneIllFormed("a 3D support box is needed for the depth null field")
    top = box.upper[-1]
    if abs(h(top)) > VANISH_TOL or abs(dh(top)) > VANISH_TOL:
        record_gauge_check("depth", False)
        raise HConditionViolated("h has not decayed at the top of the box", top=top, h_top=h(top))
    field = lift(rename(dh, {name: "x3"}), ("x1", "x2", "x3"))
    null = hyperplane_null_scene(scene, field, box)
    if thetas is None:
        angle = math.atan2(scene.theta0[1], scene.theta0[0])
        thetas = [(math.cos(angle + k * math.pi / 4), math.sin(angle + k * math.pi / 4)) for k in (0, 1, -1)]
    default1, default2 = _sweep_axes(box)
    annihilation = verify_annihilation(
        null,
        default1 if axis1 is None else axis1,
        default2 if axis2 is None else axis2,
        options,
        thetas=thetas,
        offsets=offsets,
        kind="depth",
    )
    return field, annihilation


# Verification sweeps

def _gliding_residual(scene) -> float:
    if isinstance(scene, HyperplaneScene):
        box = scene.box
        if box.lower[2] > 0.0:
            return 0.0
        x1, x2 = np.meshgrid(*Box(lower=box.lower[:2], upper=box.upper[:2]).axes(FRAME_POINTS), indexing="ij")
        return float(np.max(np.abs(scene.field3d.evaluate_array(x1, x2, np.zeros_like(x1)))))
    return float(np.max(np.abs(_field_on(scene, _gliding_points(scene)))))


def verify_annihilation(
    scene,
    axis1: Sequence[float],
    axis2: Sequence[float],
    options: Optional[QuadratureOptions] = None,
    thetas: Optional[Sequence[Sequence[float]]] = None,
    offsets: Sequence[float] = (0.0,),
    threads: Optional[int] = None,
    kind: str = "annihilation",
) -> Annihilation:
    """
    Sweep a claimed kernel element through the geometric forward operator.

    Hyperplane scenes are swept on every (θ, offset) pair; the residual
    grids are returned under readable labels.
    """
    if scene.mode is not FieldMode.FIELD:
        raise SceneIllFormed("annihilation sweeps need a field-mode scene")
    axis1 = np.asarray(axis1, dtype=float)
    axis2 = np.asarray(axis2, dtype=float)
    grids: Dict[str, DataGrid] = {}
    witness: Optional[List[float]] = None
    worst = -1.0
    if isinstance(scene, HyperplaneScene):
        runs = [
            (f"theta={theta[0]:g},{theta[1]:g} offset={offset:g}", tuple(theta), float(offset))
            for theta in (thetas or [scene.theta0]) for offset in offsets
        ]
    else:
        runs = [("sweep", None, 0.0)]
    for label, theta, offset in runs:
        grid = sweep(scene, axis1, axis2, options, ForwardMethod.GEOMETRIC, threads, offset=offset, theta=theta)
        grids[label] = grid
        i, j = np.unravel_index(int(np.argmax(np.abs(grid.values))), grid.shape)
        if abs(grid.values[i, j]) > worst:
            worst = float(abs(grid.values[i, j]))
            witness = [float(axis1[i]), float(axis2[j])]
            if theta is not None:
                witness += [offset, *theta]
    gliding = _gliding_residual(scene)
    passed = worst <= FORWARD_TOL and gliding <= BOUNDARY_TOL
    record_gauge_check(kind, passed)
    logger.info(f"Annihilation sweep ({kind}): max |R f| = {worst:.3e}, max |f| on the gliding set = {gliding:.3e}")
    return Annihilation(max_residual=worst, gliding_residual=gliding, witness=witness, grids=grids)
