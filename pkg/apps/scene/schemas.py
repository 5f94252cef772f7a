# apps/scene/schemas.py
"""Scene value objects: supports, profiles, extended fields and the three scene kinds."""

from __future__ import annotations

import math
from enum import Enum
from functools import cached_property
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.optimize import minimize_scalar

from apps.core.exceptions import DomainError, SceneIllFormed
from apps.expr import ExprAST, constant, derivative, directional_derivative, print_expr, simplify, substitute
from apps.expr.schemas import Number, Symbol
from apps.expr.service import mk_add, mk_mul
from apps.scene.geometry import CurveGeometry, FramePoint, clip_ray
from conf.settings import get_settings

EDGE_REL_TOL = 1e-12
UNIT_TOL = 1e-12


class SceneKind(str, Enum):
    """Supported gliding geometries."""
    FLAT2D = "flat2d"
    HYPERPLANE = "hyperplane"
    CURVE = "curve"


class FieldMode(str, Enum):
    """How the unknown is described: a one-variable profile or a full field."""
    PROFILE = "profile"
    FIELD = "field"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not-applicable"


def _expect_variables(ast: ExprAST, variables: Sequence[str], role: str) -> None:
    if ast.variables != tuple(variables):
        raise SceneIllFormed(
            f"{role} must be declared over {list(variables)}", role=role, declared=list(ast.variables)
        )


def _lattice_values(ast: ExprAST, role: str, *axes: np.ndarray) -> np.ndarray:
    try:
        return ast.evaluate_array(*axes)
    except DomainError as exc:
        raise SceneIllFormed(f"{role} is not finite on its support", role=role, op=exc.op) from exc


class Box(BaseModel):
    """Axis-aligned box in one to three dimensions; infinite bounds are allowed."""
    model_config = ConfigDict(frozen=True)

    lower: Tuple[float, ...] = Field(..., description="Lower corner")
    upper: Tuple[float, ...] = Field(..., description="Upper corner")

    @model_validator(mode="after")
    def _check_corners(self) -> "Box":
        if len(self.lower) != len(self.upper) or not 1 <= len(self.lower) <= 3:
            raise SceneIllFormed("box corners must share a dimension between 1 and 3",
                                 lower=list(self.lower), upper=list(self.upper))
        for lo, hi in zip(self.lower, self.upper):
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise SceneIllFormed("box bounds must satisfy lower <= upper",
                                     lower=list(self.lower), upper=list(self.upper))
        return self

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(b) for b in self.lower + self.upper)

    def interval(self, axis: int) -> Tuple[float, float]:
        return self.lower[axis], self.upper[axis]

    def widths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    def contains(self, point: Sequence[float], pad: float = 0.0) -> bool:
        return all(lo - pad <= p <= hi + pad for p, lo, hi in zip(point, self.lower, self.upper))

    def axes(self, points: int) -> List[np.ndarray]:
        if not self.is_finite:
            raise SceneIllFormed("cannot lay a lattice over an unbounded box")
        return [np.linspace(lo, hi, points) for lo, hi in zip(self.lower, self.upper)]

    def canonical(self) -> str:
        return ",".join(repr(float(b)) for b in self.lower + self.upper)


class Profile(BaseModel):
    """One-variable profile f̃ with a declared compact support [a, b]."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    expr: ExprAST = Field(..., description="Profile expression in one variable")
    support: Tuple[float, float] = Field(..., description="Declared support interval [a, b]")
    total_integral: Optional[float] = Field(None, description="∫f̃, when supplied by the caller")

    @model_validator(mode="after")
    def _check_support(self) -> "Profile":
        if len(self.expr.variables) != 1:
            raise SceneIllFormed("profile must be an expression in exactly one variable",
                                 declared=list(self.expr.variables))
        a, b = self.support
        if not (math.isfinite(a) and math.isfinite(b) and a <= b):
            raise SceneIllFormed("profile support must be a finite interval", support=list(self.support))
        if b > a:
            values = _lattice_values(self.expr, "profile",
                                     np.linspace(a, b, get_settings().HEADWAVE_LATTICE_POINTS))
            peak = float(np.max(np.abs(values)))
            edge = float(max(abs(values[0]), abs(values[-1])))
            if edge > EDGE_REL_TOL * peak:
                raise SceneIllFormed("profile does not vanish at its declared support edges",
                                     edge=edge, peak=peak, support=list(self.support))
        return self

    @classmethod
    def zero(cls, support: Tuple[float, float] = (0.0, 0.0)) -> "Profile":
        return cls.model_construct(expr=constant(0.0, ("x",)), support=support, total_integral=0.0)

    def __call__(self, x: float) -> float:
        a, b = self.support
        if x < a or x > b:
            return 0.0
        return self.expr(x)

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        a, b = self.support
        inside = (xs >= a) & (xs <= b)
        values = np.zeros_like(xs)
        if inside.any():
            values[inside] = self.expr.evaluate_array(xs[inside])
        return values

    @cached_property
    def peak(self) -> float:
        """max |f̃| on the support: lattice maximum polished by a bounded 1D search."""
        a, b = self.support
        if b <= a:
            return 0.0
        xs = np.linspace(a, b, get_settings().HEADWAVE_LATTICE_POINTS)
        values = np.abs(self.evaluate_array(xs))
        k = int(np.argmax(values))
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]
        result = minimize_scalar(lambda x: -abs(self(x)), bounds=(lo, hi), method="bounded",
                                 options={"xatol": 1e-12})
        return max(float(values[k]), float(-result.fun))

    def scaled(self, factor: float) -> "Profile":
        expr = ExprAST(mk_mul(Number(float(factor)), self.expr.root), self.expr.variables)
        total = None if self.total_integral is None else factor * self.total_integral
        return Profile.model_construct(expr=expr, support=self.support, total_integral=total)

    def fingerprint(self) -> Dict[str, str]:
        return {"profile": print_expr(self.expr), "support": f"{self.support[0]!r},{self.support[1]!r}"}


class ExtendedField(BaseModel):
    """A unit vector field on the plane extending u or v off the gliding set."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    components: Tuple[ExprAST, ExprAST] = Field(..., description="Components (w1, w2) in (x, y)")

    @model_validator(mode="after")
    def _check_components(self) -> "ExtendedField":
        for index, component in enumerate(self.components):
            _expect_variables(component, ("x", "y"), f"extended field component {index + 1}")
        return self

    @classmethod
    def constant(cls, vector: Sequence[float]) -> "ExtendedField":
        return cls(components=(constant(vector[0], ("x", "y")), constant(vector[1], ("x", "y"))))

    @property
    def is_constant(self) -> bool:
        return all(c.is_constant for c in self.components)

    @cached_property
    def jacobian(self) -> Tuple[Tuple[ExprAST, ExprAST], Tuple[ExprAST, ExprAST]]:
        return tuple(
            (derivative(c, "x"), derivative(c, "y")) for c in self.components
        )

    @cached_property
    def divergence(self) -> ExprAST:
        (dw1_dx, _), (_, dw2_dy) = self.jacobian
        return ExprAST(mk_add(dw1_dx.root, dw2_dy.root), ("x", "y"))

    def __call__(self, x: float, y: float) -> np.ndarray:
        return np.array([self.components[0](x, y), self.components[1](x, y)])

    def evaluate_array(self, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.components[0].evaluate_array(xs, ys), self.components[1].evaluate_array(xs, ys)

    def apply(self, ast: ExprAST) -> ExprAST:
        """Symbolic w·∇ of a field in (x, y)."""
        return directional_derivative(ast, self.components)

    def check_straight(self, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Straight-integral-curve residual on a lattice.

        Returns:
            (|(w·∇)w|, ||w| − 1|) pointwise
        """
        w1, w2 = self.evaluate_array(xs, ys)
        (a11, a12), (a21, a22) = [
            tuple(d.evaluate_array(xs, ys) for d in row) for row in self.jacobian
        ]
        bend = np.hypot(w1 * a11 + w2 * a12, w1 * a21 + w2 * a22)
        return bend, np.abs(np.hypot(w1, w2) - 1.0)

    def canonical(self) -> str:
        return ";".join(print_expr(c) for c in self.components)


def det_frame(u: ExtendedField, v: ExtendedField) -> ExprAST:
    """det A_{u,v} = u1 v2 − u2 v1 as an expression in (x, y)."""
    u1, u2 = (c.root for c in u.components)
    v1, v2 = (c.root for c in v.components)
    return ExprAST(u1 * v2 - u2 * v1, ("x", "y"))


def _unit_second_component(first: float, role: str) -> float:
    if not -1.0 < first < 1.0:
        raise DomainError("sqrt", 1.0 - first * first, role=role)
    return math.sqrt(1.0 - first * first)


class FlatScene2D(BaseModel):
    """Gliding along the line y = 0 in the plane, u and v given by their first components."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["flat2d"] = "flat2d"
    u1: ExprAST = Field(..., description="First component of the descending direction, in x")
    v1: ExprAST = Field(..., description="First component of the ascending direction, in x")
    profile: Optional[Profile] = Field(None, description="Profile f̃ (profile mode)")
    field2d: Optional[ExprAST] = Field(None, description="Field f(x, y) (field mode)")
    box: Optional[Box] = Field(None, description="Support box of field2d")
    domain: Optional[Tuple[float, float]] = Field(None, description="Reconstruction domain")
    u_ext: Optional[ExtendedField] = Field(None, description="Extension of u off the line")
    v_ext: Optional[ExtendedField] = Field(None, description="Extension of v off the line")

    @model_validator(mode="after")
    def _check_scene(self) -> "FlatScene2D":
        _expect_variables(self.u1, ("x",), "u1")
        _expect_variables(self.v1, ("x",), "v1")
        if (self.profile is None) == (self.field2d is None):
            raise SceneIllFormed("exactly one of profile or field must be given")
        if self.field2d is not None:
            _expect_variables(self.field2d, ("x", "y"), "field")
            if self.box is None or self.box.dim != 2 or not self.box.is_finite:
                raise SceneIllFormed("field mode needs a finite 2D support box")
        if self.domain is not None and not (
            math.isfinite(self.domain[0]) and math.isfinite(self.domain[1]) and self.domain[0] < self.domain[1]
        ):
            raise SceneIllFormed("reconstruction domain must be a finite interval", domain=list(self.domain))
        if (self.u_ext is None) != (self.v_ext is None):
            raise SceneIllFormed("extended fields must be supplied as a pair")
        return self

    @property
    def mode(self) -> FieldMode:
        return FieldMode.PROFILE if self.profile is not None else FieldMode.FIELD

    @cached_property
    def du1(self) -> ExprAST:
        return derivative(self.u1, "x")

    @cached_property
    def dv1(self) -> ExprAST:
        return derivative(self.v1, "x")

    @property
    def reconstruction_domain(self) -> Tuple[float, float]:
        if self.domain is not None:
            return self.domain
        if self.profile is not None:
            return self.profile.support
        return self.box.interval(0)

    @cached_property
    def support_box(self) -> Box:
        """Where f can be nonzero: the strip over the profile support, or the field's box."""
        if self.profile is not None:
            a, b = self.profile.support
            return Box(lower=(a, 0.0), upper=(b, math.inf))
        return self.box

    def u_vector(self, x: float) -> np.ndarray:
        u1 = self.u1(x)
        return np.array([u1, _unit_second_component(u1, "u1")])

    def v_vector(self, x: float) -> np.ndarray:
        v1 = self.v1(x)
        return np.array([v1, _unit_second_component(v1, "v1")])

    def leg_directions(self, x: float, d: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        """Directions of the descending leg at x and the ascending leg at x + d."""
        return self.u_vector(x), self.v_vector(x + d)

    def field_value(self, x: float, y: float) -> float:
        if self.profile is not None:
            return self.profile(x) if y >= 0.0 else 0.0
        if not self.box.contains((x, y)):
            return 0.0
        return self.field2d(x, y)

    def fingerprint(self) -> Dict[str, str]:
        keys = {"kind": self.kind, "mode": self.mode.value, "u1": print_expr(self.u1), "v1": print_expr(self.v1)}
        if self.profile is not None:
            keys.update(self.profile.fingerprint())
        else:
            keys.update({"field": print_expr(self.field2d), "box": self.box.canonical()})
        return keys


class HyperplaneScene(BaseModel):
    """Gliding on the hyperplane x3 = 0 in R^3 for one fixed direction θ0."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["hyperplane"] = "hyperplane"
    n: int = Field(3, description="Ambient dimension")
    lambda_u: ExprAST = Field(..., description="λ_u(x1, x2)")
    lambda_v: ExprAST = Field(..., description="λ_v(x1, x2)")
    theta0: Tuple[float, float] = Field(..., description="Unit gliding direction in the hyperplane")
    profile_nd: Optional[ExprAST] = Field(None, description="Profile f̃(x1, x2) (profile mode)")
    support: Optional[Box] = Field(None, description="2D support box of profile_nd")
    field3d: Optional[ExprAST] = Field(None, description="Field f(x1, x2, x3) (field mode)")
    box: Optional[Box] = Field(None, description="3D support box of field3d")
    domain: Optional[Box] = Field(None, description="2D reconstruction domain")
    _slices: Dict[float, FlatScene2D] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_scene(self) -> "HyperplaneScene":
        if self.n != 3:
            raise SceneIllFormed("only n = 3 hyperplane scenes are supported", n=self.n)
        _expect_variables(self.lambda_u, ("x1", "x2"), "lambda_u")
        _expect_variables(self.lambda_v, ("x1", "x2"), "lambda_v")
        if abs(math.hypot(*self.theta0) - 1.0) > UNIT_TOL:
            raise SceneIllFormed("theta0 must be a unit vector", theta0=list(self.theta0))
        if (self.profile_nd is None) == (self.field3d is None):
            raise SceneIllFormed("exactly one of profile or field must be given")
        if self.profile_nd is not None:
            _expect_variables(self.profile_nd, ("x1", "x2"), "profile")
            if self.support is None or self.support.dim != 2 or not self.support.is_finite:
                raise SceneIllFormed("profile mode needs a finite 2D support box")
            self._check_profile_edges()
        else:
            _expect_variables(self.field3d, ("x1", "x2", "x3"), "field")
            if self.box is None or self.box.dim != 3 or not self.box.is_finite:
                raise SceneIllFormed("field mode needs a finite 3D support box")
        if self.domain is not None and (self.domain.dim != 2 or not self.domain.is_finite):
            raise SceneIllFormed("reconstruction domain must be a finite 2D box")
        return self

    def _check_profile_edges(self) -> None:
        points = get_settings().HEADWAVE_LATTICE_POINTS
        ax1, ax2 = self.support.axes(points)
        g1, g2 = np.meshgrid(ax1, ax2, indexing="ij")
        values = _lattice_values(self.profile_nd, "profile", g1, g2)
        peak = float(np.max(np.abs(values)))
        edge = float(max(np.abs(values[0]).max(), np.abs(values[-1]).max(),
                         np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max()))
        if edge > EDGE_REL_TOL * peak:
            raise SceneIllFormed("profile does not vanish on the boundary of its support box", edge=edge, peak=peak)

    @property
    def mode(self) -> FieldMode:
        return FieldMode.PROFILE if self.profile_nd is not None else FieldMode.FIELD

    @property
    def theta_perp(self) -> Tuple[float, float]:
        return -self.theta0[1], self.theta0[0]

    @property
    def reconstruction_domain(self) -> Box:
        if self.domain is not None:
            return self.domain
        if self.support is not None:
            return self.support
        return Box(lower=self.box.lower[:2], upper=self.box.upper[:2])

    @cached_property
    def d_lambda_u(self) -> ExprAST:
        return directional_derivative(self.lambda_u, self.theta0)

    @cached_property
    def d_lambda_v(self) -> ExprAST:
        return directional_derivative(self.lambda_v, self.theta0)

    def line_coordinates(self, point: Sequence[float]) -> Tuple[float, float]:
        """(s, c) with point = s·θ0 + c·θ0⊥."""
        p = np.asarray(point, dtype=float)
        return float(p @ np.asarray(self.theta0)), float(p @ np.asarray(self.theta_perp))

    def line_point(self, s: float, offset: float) -> np.ndarray:
        return s * np.asarray(self.theta0) + offset * np.asarray(self.theta_perp)

    def _on_line(self, ast: ExprAST, offset: float) -> ExprAST:
        (t1, t2), (p1, p2) = self.theta0, self.theta_perp
        x = Symbol("x")
        mapping = {
            "x1": mk_add(mk_mul(Number(t1), x), Number(offset * p1)),
            "x2": mk_add(mk_mul(Number(t2), x), Number(offset * p2)),
        }
        return simplify(substitute(ast, mapping, ("x",)))

    def slice_scene(self, offset: float) -> FlatScene2D:
        """
        Induced flat scene on the line s·θ0 + offset·θ0⊥ (profile mode).

        The line parameter s plays the role of x.
        """
        offset = float(offset)
        cached = self._slices.get(offset)
        if cached is not None:
            return cached
        if self.profile_nd is None:
            raise SceneIllFormed("slices are defined for profile-mode hyperplane scenes only")
        hit = clip_ray(self.support, self.line_point(0.0, offset), self.theta0)
        if hit is None or hit[1] <= hit[0]:
            profile = Profile.zero()
        else:
            profile = Profile.model_construct(
                expr=self._on_line(self.profile_nd, offset), support=hit, total_integral=None
            )
        scene = FlatScene2D.model_construct(
            kind="flat2d",
            u1=self._on_line(self.lambda_u, offset),
            v1=self._on_line(self.lambda_v, offset),
            profile=profile,
            field2d=None,
            box=None,
            domain=None,
            u_ext=None,
            v_ext=None,
        )
        self._slices[offset] = scene
        return scene

    def u_vector(self, point: Sequence[float], theta: Optional[Sequence[float]] = None) -> np.ndarray:
        lam = self.lambda_u(*point)
        theta = self.theta0 if theta is None else theta
        return np.array([lam * theta[0], lam * theta[1], _unit_second_component(lam, "lambda_u")])

    def v_vector(self, point: Sequence[float], theta: Optional[Sequence[float]] = None) -> np.ndarray:
        lam = self.lambda_v(*point)
        theta = self.theta0 if theta is None else theta
        return np.array([lam * theta[0], lam * theta[1], _unit_second_component(lam, "lambda_v")])

    def fingerprint(self) -> Dict[str, str]:
        keys = {
            "kind": self.kind,
            "mode": self.mode.value,
            "n": str(self.n),
            "lambda_u": print_expr(self.lambda_u),
            "lambda_v": print_expr(self.lambda_v),
            "theta0": f"{self.theta0[0]!r},{self.theta0[1]!r}",
        }
        if self.profile_nd is not None:
            keys.update({"profile": print_expr(self.profile_nd), "support": self.support.canonical()})
        else:
            keys.update({"field": print_expr(self.field3d), "box": self.box.canonical()})
        return keys


class CurveScene(BaseModel):
    """Gliding along a smooth plane curve γ; u and v are angles measured from γ'."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["curve"] = "curve"
    gamma: Tuple[ExprAST, ExprAST] = Field(..., description="Curve components in t")
    t_range: Tuple[float, float] = Field(..., description="Parameter range of γ")
    u_angle: ExprAST = Field(..., description="Angle of u from γ' (radians), in t")
    v_angle: ExprAST = Field(..., description="Angle of v from γ' (radians), in t")
    profile: Optional[Profile] = Field(None, description="Profile f̃, f(p) = f̃(p·e(p))")
    field2d: Optional[ExprAST] = Field(None, description="Field f(x, y) (field mode)")
    box: Optional[Box] = Field(None, description="Support box of field2d")
    tube_radius: float = Field(..., gt=0, description="Radius of the tubular neighborhood")
    domain: Optional[Tuple[float, float]] = Field(None, description="Reconstruction domain (arc length)")
    u_ext: Optional[ExtendedField] = Field(None, description="Extension of u off the curve")
    v_ext: Optional[ExtendedField] = Field(None, description="Extension of v off the curve")

    @model_validator(mode="after")
    def _check_scene(self) -> "CurveScene":
        for index, component in enumerate(self.gamma):
            _expect_variables(component, ("t",), f"gamma component {index + 1}")
        _expect_variables(self.u_angle, ("t",), "u_angle")
        _expect_variables(self.v_angle, ("t",), "v_angle")
        lo, hi = self.t_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise SceneIllFormed("t_range must be a finite interval", t_range=list(self.t_range))
        if (self.profile is None) == (self.field2d is None):
            raise SceneIllFormed("exactly one of profile or field must be given")
        if self.field2d is not None:
            _expect_variables(self.field2d, ("x", "y"), "field")
            if self.box is None or self.box.dim != 2 or not self.box.is_finite:
                raise SceneIllFormed("field mode needs a finite 2D support box")
        if (self.u_ext is None) != (self.v_ext is None):
            raise SceneIllFormed("extended fields must be supplied as a pair")
        return self

    @property
    def mode(self) -> FieldMode:
        return FieldMode.PROFILE if self.profile is not None else FieldMode.FIELD

    @cached_property
    def geometry(self) -> CurveGeometry:
        return CurveGeometry(
            self.gamma, self.t_range, self.u_angle, self.v_angle, panels=get_settings().HEADWAVE_ARC_PANELS
        )

    @property
    def s_range(self) -> Tuple[float, float]:
        return self.geometry.s_min, self.geometry.s_max

    @property
    def reconstruction_domain(self) -> Tuple[float, float]:
        return self.domain if self.domain is not None else self.s_range

    # accessors in the arc-length parameter

    def arc_length(self, t: float) -> float:
        return self.geometry.arc_length(t)

    def parameter_at(self, s: float) -> float:
        return self.geometry.parameter_at(s)

    def frame(self, s: float) -> FramePoint:
        return self.geometry.frame(self.parameter_at(s))

    def position(self, s: float) -> np.ndarray:
        return self.frame(s).position

    def tangent(self, s: float) -> np.ndarray:
        return self.frame(s).tangent

    def normal(self, s: float) -> np.ndarray:
        return self.frame(s).normal

    def u(self, s: float) -> np.ndarray:
        return self.frame(s).u

    def v(self, s: float) -> np.ndarray:
        return self.frame(s).v

    def u1(self, s: float) -> float:
        return self.frame(s).u1

    def v1(self, s: float) -> float:
        return self.frame(s).v1

    def du1(self, s: float) -> float:
        return self.frame(s).du1

    def dv1(self, s: float) -> float:
        return self.frame(s).dv1

    def gamma1(self, s: float) -> float:
        return self.frame(s).gamma1

    def gamma1_prime(self, s: float) -> float:
        return self.frame(s).gamma1_prime

    def field_value(self, x: float, y: float) -> float:
        """f at a plane point: f̃(p·e(p)) inside the tube (profile mode) or the field expression."""
        if self.field2d is not None:
            return self.field2d(x, y) if self.box.contains((x, y)) else 0.0
        t_star, _ = self.geometry.project((x, y), self.tube_radius)
        return self.profile(float(np.dot((x, y), self.geometry.tangent(t_star))))

    def fingerprint(self) -> Dict[str, str]:
        keys = {
            "kind": self.kind,
            "mode": self.mode.value,
            "gamma": ";".join(print_expr(c) for c in self.gamma),
            "t_range": f"{self.t_range[0]!r},{self.t_range[1]!r}",
            "u_angle": print_expr(self.u_angle),
            "v_angle": print_expr(self.v_angle),
            "tube_radius": repr(float(self.tube_radius)),
        }
        if self.profile is not None:
            keys.update(self.profile.fingerprint())
        else:
            keys.update({"field": print_expr(self.field2d), "box": self.box.canonical()})
        return keys


class AssumptionVerdict(BaseModel):
    """Outcome of one assumption check on the validation lattice."""
    name: str = Field(..., description="Assumption label, e.g. A1.sign")
    status: Verdict = Field(..., description="holds, fails or not-applicable")
    worst_margin: Optional[float] = Field(None, description="Smallest margin seen on the lattice")
    failures: List[List[float]] = Field(default_factory=list, description="First failing lattice points")
    message: str = Field("", description="What was checked")


class AssumptionReport(BaseModel):
    """Per-assumption verdicts for one scene."""
    kind: SceneKind = Field(..., description="Scene kind")
    lattice_points: int = Field(..., description="Lattice points per dimension")
    verdicts: List[AssumptionVerdict] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(v.status != Verdict.FAILS for v in self.verdicts)

    def get(self, name: str) -> AssumptionVerdict:
        for verdict in self.verdicts:
            if verdict.name == name:
                return verdict
        raise KeyError(name)

    def failed(self) -> List[AssumptionVerdict]:
        return [v for v in self.verdicts if v.status == Verdict.FAILS]

    def to_text(self) -> str:
        lines = [f"scene: {self.kind.value} (lattice {self.lattice_points})"]
        for v in self.verdicts:
            margin = "-" if v.worst_margin is None else f"{v.worst_margin:.6g}"
            line = f"  {v.name:<22} {v.status.value:<15} margin={margin}"
            if v.failures:
                line += f"  first failure at {v.failures[0]}"
            if v.message:
                line += f"  ({v.message})"
            lines.append(line)
        return "\n".join(lines)
