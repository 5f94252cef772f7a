# apps/scene/service.py
"""Assumption checks on validation lattices and curve frame helpers."""

from __future__ import annotations

import math
from functools import singledispatch
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import LatticeTooCoarse, SceneIllFormed
from apps.expr import ExprAST, rename
from apps.expr.schemas import Call
from apps.scene.schemas import (
    AssumptionReport,
    AssumptionVerdict,
    Box,
    CurveScene,
    ExtendedField,
    FieldMode,
    FlatScene2D,
    HyperplaneScene,
    SceneKind,
    Verdict,
    det_frame,
)
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

Scene = Union[FlatScene2D, HyperplaneScene, CurveScene]

MIN_LATTICE = 256
STRAIGHT_TOL = 1e-6
DET_TOL = 1e-9
ARC_TOL = 1e-8
MAX_LISTED_FAILURES = 5


def _verdict(name: str, ok: np.ndarray, margin: np.ndarray, points: Sequence[np.ndarray], message: str = "") -> AssumptionVerdict:
    """Collapse a pointwise check into a verdict; `points` holds the lattice coordinates."""
    ok = np.asarray(ok, dtype=bool)
    margin = np.asarray(margin, dtype=float)
    worst = float(np.min(margin)) if margin.size else None
    bad = np.flatnonzero(~ok.ravel())
    failures = [
        [float(np.ravel(axis)[i]) for axis in points] for i in bad[:MAX_LISTED_FAILURES]
    ]
    status = Verdict.HOLDS if bad.size == 0 else Verdict.FAILS
    return AssumptionVerdict(name=name, status=status, worst_margin=worst, failures=failures, message=message)


def _skip(name: str, message: str) -> AssumptionVerdict:
    return AssumptionVerdict(name=name, status=Verdict.NOT_APPLICABLE, message=message)


def _extension_checks(
    u_ext: Optional[ExtendedField], v_ext: Optional[ExtendedField], box: Optional[Box], points: int
) -> list[AssumptionVerdict]:
    if u_ext is None or box is None:
        return [
            _skip("B1.straight", "no extended fields supplied"),
            _skip("B2.independent", "no extended fields supplied"),
        ]
    ax, ay = box.axes(points)
    gx, gy = np.meshgrid(ax, ay, indexing="ij")
    bend_u, norm_u = u_ext.check_straight(gx, gy)
    bend_v, norm_v = v_ext.check_straight(gx, gy)
    residual = np.maximum.reduce([bend_u, norm_u, bend_v, norm_v])
    det = np.abs(det_frame(u_ext, v_ext).evaluate_array(gx, gy))
    return [
        _verdict("B1.straight", residual <= STRAIGHT_TOL, STRAIGHT_TOL - residual, (gx, gy),
                 "|(w·∇)w| and ||w|-1| on the support box"),
        _verdict("B2.independent", det >= DET_TOL, det, (gx, gy), "|det A_{u,v}|"),
    ]


def _flat_extension_box(scene: FlatScene2D) -> Optional[Box]:
    if scene.box is not None:
        return scene.box
    a, b = scene.reconstruction_domain
    return Box(lower=(a, 0.0), upper=(b, b - a))


@singledispatch
def _checks(scene, points: int) -> list[AssumptionVerdict]:
    raise SceneIllFormed(f"unsupported scene type {type(scene).__name__}")


@_checks.register
def _(scene: FlatScene2D, points: int) -> list[AssumptionVerdict]:
    eps = get_settings().HEADWAVE_EPS_COND
    if scene.profile is not None:
        lo = min(scene.profile.support[0], scene.reconstruction_domain[0])
        hi = max(scene.profile.support[1], scene.reconstruction_domain[1])
    else:
        lo, hi = scene.box.interval(0)
    xs = np.linspace(lo, hi, points)
    u1, v1 = scene.u1.evaluate_array(xs), scene.v1.evaluate_array(xs)
    margin = np.minimum.reduce([-u1, 1.0 + u1, v1, 1.0 - v1])
    verdicts = [_verdict("A1.sign", margin > 0.0, margin, (xs,), "-1 < u1 < 0 and 0 < v1 < 1")]

    if scene.mode is FieldMode.PROFILE:
        xs = np.linspace(*scene.reconstruction_domain, points)
        u1, v1 = scene.u1.evaluate_array(xs), scene.v1.evaluate_array(xs)
        du1, dv1 = scene.du1.evaluate_array(xs), scene.dv1.evaluate_array(xs)
        stated = np.abs(du1 * v1 * (1.0 - v1) + dv1 * u1 * (1.0 - u1))
        # α'β − β'α for α = 1/u1 + 1/v1, β = 1 − 1/v1
        alpha = 1.0 / u1 + 1.0 / v1
        beta = 1.0 - 1.0 / v1
        alpha_p = -du1 / u1**2 - dv1 / v1**2
        beta_p = dv1 / v1**2
        denom = np.abs(alpha_p * beta - beta_p * alpha)
        verdicts += [
            _verdict("A1.nondegeneracy", stated >= eps, stated, (xs,), "|u1'v1(1-v1) + v1'u1(1-u1)|"),
            _verdict("A1.denominator", denom >= eps, denom, (xs,), "|α'β - β'α|"),
        ]
    else:
        verdicts += [
            _skip("A1.nondegeneracy", "field mode"),
            _skip("A1.denominator", "field mode"),
        ]

    verdicts += _extension_checks(scene.u_ext, scene.v_ext, _flat_extension_box(scene), points)
    if scene.u_ext is not None:
        # the extensions must restrict to u and v on the line
        xs = np.linspace(*scene.reconstruction_domain, points)
        zeros = np.zeros_like(xs)
        eu1, _ = scene.u_ext.evaluate_array(xs, zeros)
        ev1, _ = scene.v_ext.evaluate_array(xs, zeros)
        gap = np.maximum(np.abs(eu1 - scene.u1.evaluate_array(xs)), np.abs(ev1 - scene.v1.evaluate_array(xs)))
        verdicts.append(_verdict("B1.trace", gap <= STRAIGHT_TOL, STRAIGHT_TOL - gap, (xs,),
                                 "extensions agree with u1, v1 on y = 0"))
    verdicts.append(_skip("B3.constant", "flat scenes"))
    return verdicts


@_checks.register
def _(scene: HyperplaneScene, points: int) -> list[AssumptionVerdict]:
    eps = get_settings().HEADWAVE_EPS_COND
    hull = scene.reconstruction_domain
    if scene.support is not None:
        hull = Box(
            lower=tuple(min(a, b) for a, b in zip(hull.lower, scene.support.lower)),
            upper=tuple(max(a, b) for a, b in zip(hull.upper, scene.support.upper)),
        )
    g1, g2 = np.meshgrid(*hull.axes(points), indexing="ij")
    lu, lv = scene.lambda_u.evaluate_array(g1, g2), scene.lambda_v.evaluate_array(g1, g2)
    margin = np.minimum.reduce([-lu, 1.0 + lu, lv, 1.0 - lv])
    verdicts = [_verdict("A2.sign", margin > 0.0, margin, (g1, g2), "-1 < λ_u < 0 < λ_v < 1")]

    if scene.mode is FieldMode.PROFILE:
        g1, g2 = np.meshgrid(*scene.reconstruction_domain.axes(points), indexing="ij")
        lu, lv = scene.lambda_u.evaluate_array(g1, g2), scene.lambda_v.evaluate_array(g1, g2)
        dlu, dlv = scene.d_lambda_u.evaluate_array(g1, g2), scene.d_lambda_v.evaluate_array(g1, g2)
        stated = np.abs((1.0 - lv) * lv * dlu + (1.0 - lu) * lu * dlv)
        alpha = 1.0 / lu + 1.0 / lv
        beta = 1.0 - 1.0 / lv
        d_alpha = -dlu / lu**2 - dlv / lv**2
        d_beta = dlv / lv**2
        denom = np.abs(beta * d_alpha - alpha * d_beta)
        verdicts += [
            _verdict("A2.nondegeneracy", stated >= eps, stated, (g1, g2),
                     "|(1-λ_v)λ_v Dλ_u + (1-λ_u)λ_u Dλ_v|"),
            _verdict("A2.denominator", denom >= eps, denom, (g1, g2), "|βDα - αDβ|"),
            _skip("B3.constant", "profile mode"),
        ]
    else:
        verdicts += [_skip("A2.nondegeneracy", "field mode"), _skip("A2.denominator", "field mode")]
        constant = scene.lambda_u.is_constant and scene.lambda_v.is_constant
        verdicts.append(AssumptionVerdict(
            name="B3.constant",
            status=Verdict.HOLDS if constant else Verdict.FAILS,
            message="λ_u and λ_v independent of x′",
        ))
    return verdicts


@_checks.register
def _(scene: CurveScene, points: int) -> list[AssumptionVerdict]:
    eps = get_settings().HEADWAVE_EPS_COND
    geometry = scene.geometry
    ts = np.linspace(geometry.t_min, geometry.t_max, points)
    f = geometry.frames(ts)
    margin = np.minimum.reduce([-f["u1"], f["u2"], f["v1"], f["v2"]])
    verdicts = [_verdict("A3.sign", margin > 0.0, margin, (ts,), "u·γ' < 0, u·γ'⊥ > 0, v·γ' > 0, v·γ'⊥ > 0")]

    stations = np.linspace(geometry.s_min, geometry.s_max, 64)
    drift = np.array([abs(geometry.arc_length(geometry.parameter_at(s)) - s) for s in stations])
    verdicts.append(_verdict("A3.unit_speed", drift <= ARC_TOL, ARC_TOL - drift, (stations,),
                             "arc-length reparameterization"))

    if scene.mode is FieldMode.PROFILE:
        s_lo, s_hi = scene.reconstruction_domain
        ts = np.linspace(geometry.parameter_at(s_lo), geometry.parameter_at(s_hi), points)
        f = geometry.frames(ts)
        u1, v1, du1, dv1 = f["u1"], f["v1"], f["du1"], f["dv1"]
        alpha = 1.0 / u1 + 1.0 / v1
        beta = 1.0 / v1
        alpha_p = -du1 / u1**2 - dv1 / v1**2
        beta_p = -dv1 / v1**2
        denom = np.abs(alpha_p * (1.0 - f["gamma1_prime"] * beta) + beta_p * alpha * f["gamma1_prime"])
        verdicts.append(_verdict("A3.nondegeneracy", denom >= eps, denom, (ts,),
                                 "|α'(1-γ1'β) + β'αγ1'|"))
    else:
        verdicts.append(_skip("A3.nondegeneracy", "field mode"))

    separation = geometry.min_separation(scene.tube_radius)
    verdicts.append(AssumptionVerdict(
        name="A3.simple",
        status=Verdict.HOLDS if separation >= scene.tube_radius / 2.0 else Verdict.FAILS,
        worst_margin=None if math.isinf(separation) else separation - scene.tube_radius / 2.0,
        message="no self-intersection within the sampled range",
    ))

    box = scene.box
    if box is None and scene.u_ext is not None:
        r = scene.tube_radius
        trace = geometry.frames(np.linspace(geometry.t_min, geometry.t_max, points))
        xs, ys = trace["x"], trace["y"]
        box = Box(lower=(xs.min() - r, ys.min() - r), upper=(xs.max() + r, ys.max() + r))
    verdicts += _extension_checks(scene.u_ext, scene.v_ext, box, points)
    verdicts.append(_skip("B3.constant", "curve scenes"))
    return verdicts


def validate(scene: Scene, lattice: Optional[int] = None) -> AssumptionReport:
    """
    Evaluate every applicable assumption on a validation lattice.

    Args:
        scene: Any scene kind
        lattice: Points per dimension (defaults to HEADWAVE_LATTICE_POINTS)

    Returns:
        AssumptionReport; failures are reported, not raised

    Raises:
        LatticeTooCoarse: fewer than 256 points per dimension
        SceneIllFormed: a field expression is not finite on the lattice
    """
    points = lattice if lattice is not None else get_settings().HEADWAVE_LATTICE_POINTS
    if points < MIN_LATTICE:
        raise LatticeTooCoarse(f"validation lattice needs at least {MIN_LATTICE} points per dimension",
                               lattice=points)
    report = AssumptionReport(kind=SceneKind(scene.kind), lattice_points=points, verdicts=_checks(scene, points))
    if report.holds:
        logger.debug(f"All applicable assumptions hold for {scene.kind} scene")
    else:
        logger.warning(f"{scene.kind} scene fails: {', '.join(v.name for v in report.failed())}")
    return report


def nearest_point_frame(scene: CurveScene, p: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Nearest curve point to `p` and the frame there.

    Returns:
        (s*, e, e⊥) with s* the arc-length parameter, e = γ'(s*) and e⊥ its +90° rotation

    Raises:
        OutsideTube, NewtonDivergence
    """
    t_star, _ = scene.geometry.project(p, scene.tube_radius)
    e = scene.geometry.tangent(t_star)
    return scene.geometry.arc_length(t_star), e, np.array([-e[1], e[0]])


def induced_flat_scene(scene: CurveScene, tol: float = 1e-12) -> FlatScene2D:
    """
    The FlatScene2D a straight curve γ(t) = (t, 0) reduces to.

    Raises:
        SceneIllFormed: γ is not the unit-speed x-axis
    """
    ts = np.linspace(*scene.t_range, get_settings().HEADWAVE_LATTICE_POINTS)
    gx, gy = scene.gamma[0].evaluate_array(ts), scene.gamma[1].evaluate_array(ts)
    if np.max(np.abs(gx - ts)) > tol or np.max(np.abs(gy)) > tol:
        raise SceneIllFormed("only the curve γ(t) = (t, 0) reduces to a flat scene")
    u1 = rename(ExprAST(Call("cos", (scene.u_angle.root,)), ("t",)), {"t": "x"})
    v1 = rename(ExprAST(Call("cos", (scene.v_angle.root,)), ("t",)), {"t": "x"})
    return FlatScene2D(
        u1=u1,
        v1=v1,
        profile=scene.profile,
        field2d=scene.field2d,
        box=scene.box,
        domain=scene.domain,
        u_ext=scene.u_ext,
        v_ext=scene.v_ext,
    )
