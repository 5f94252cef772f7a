# apps/scene/geometry.py
"""Ray clipping and curve geometry: arc length, local frames, nearest-point projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist

from apps.core.exceptions import NewtonDivergence, OutsideTube, SceneIllFormed
from apps.expr import ExprAST, derivative
from conf.enhanced_logging import get_logger

if TYPE_CHECKING:  # pragma: no cover
    from apps.scene.schemas import Box

logger = get_logger(__name__)

STATIONARITY_TOL = 1e-12
NEWTON_MAX_ITER = 50
SEED_POINTS = 2049


def clip_ray(box: "Box", origin: Sequence[float], direction: Sequence[float]) -> Optional[Tuple[float, float]]:
    """
    Slab-clip the line origin + t·direction against an axis-aligned box.

    Returns:
        (t_in, t_out) with t_in <= t_out (either may be infinite),
        or None when the line misses the box.
    """
    t_in, t_out = -math.inf, math.inf
    for o, w, lo, hi in zip(origin, direction, box.lower, box.upper):
        if w == 0.0:
            if o < lo or o > hi:
                return None
            continue
        t0, t1 = (lo - o) / w, (hi - o) / w
        if t0 > t1:
            t0, t1 = t1, t0
        t_in = max(t_in, t0)
        t_out = min(t_out, t1)
        if t_in > t_out:
            return None
    return t_in, t_out


def clip_segment(
    box: "Box",
    origin: Sequence[float],
    direction: Sequence[float],
    t_lo: float = 0.0,
    t_hi: float = math.inf,
) -> Optional[Tuple[float, float]]:
    """Parameter range of origin + t·direction, t in [t_lo, t_hi], inside the box (None if empty)."""
    hit = clip_ray(box, origin, direction)
    if hit is None:
        return None
    lo, hi = max(hit[0], t_lo), min(hit[1], t_hi)
    if hi <= lo:
        return None
    if math.isinf(hi):
        raise SceneIllFormed("ray never leaves the support box", origin=list(origin), direction=list(direction))
    return lo, hi


@dataclass(frozen=True)
class FramePoint:
    """Geometry of the curve at one parameter value (derivatives are per unit arc length)."""
    t: float
    position: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    u: np.ndarray
    v: np.ndarray
    u1: float
    v1: float
    du1: float
    dv1: float
    gamma1: float
    gamma1_prime: float
    speed: float


class CurveGeometry:
    """
    Arc-length and frame computations for a parameterized plane curve.

    The curve is given in its own parameter t; the arc-length parameter is
    s = t_min + ∫_{t_min}^t |γ'|, so unit-speed curves keep their parameter.
    """

    def __init__(
        self,
        gamma: Tuple[ExprAST, ExprAST],
        t_range: Tuple[float, float],
        u_angle: ExprAST,
        v_angle: ExprAST,
        panels: int = 4096,
    ):
        self.gamma = gamma
        self.d1 = tuple(derivative(c, "t") for c in gamma)
        self.d2 = tuple(derivative(c, "t") for c in self.d1)
        self.u_angle = u_angle
        self.v_angle = v_angle
        self.du_angle = derivative(u_angle, "t")
        self.dv_angle = derivative(v_angle, "t")
        self.t_min, self.t_max = float(t_range[0]), float(t_range[1])
        self._build_arc_table(panels)

    # arc length

    def speed(self, t: float) -> float:
        return math.hypot(self.d1[0](t), self.d1[1](t))

    def speed_array(self, ts: np.ndarray) -> np.ndarray:
        return np.hypot(self.d1[0].evaluate_array(ts), self.d1[1].evaluate_array(ts))

    def _build_arc_table(self, panels: int) -> None:
        ts = np.linspace(self.t_min, self.t_max, panels + 1)
        speeds = self.speed_array(ts)
        if np.any(speeds <= 0.0):
            raise SceneIllFormed("curve has a stationary point (γ' = 0)", t=float(ts[np.argmin(speeds)]))
        mids = self.speed_array(0.5 * (ts[:-1] + ts[1:]))
        h = ts[1] - ts[0]
        cumulative = np.concatenate(([0.0], np.cumsum(h / 6.0 * (speeds[:-1] + 4.0 * mids + speeds[1:]))))
        self._t_table = ts
        self._s_table = self.t_min + cumulative
        self._inverse_seed = PchipInterpolator(self._s_table, ts)
        self.s_min = float(self._s_table[0])
        self.s_max = float(self._s_table[-1])

        stride = max(1, panels // (SEED_POINTS - 1))
        self._seed_t = ts[::stride]
        self._seed_x = self.gamma[0].evaluate_array(self._seed_t)
        self._seed_y = self.gamma[1].evaluate_array(self._seed_t)
        logger.debug(f"Arc-length table built: {panels} panels, length {self.s_max - self.s_min:.6g}")

    def arc_length(self, t: float) -> float:
        """Arc-length parameter s(t): table value plus an adaptive polish on the last panel."""
        k = int(np.clip(np.searchsorted(self._t_table, t) - 1, 0, len(self._t_table) - 2))
        polish, _ = quad(self.speed, self._t_table[k], t, epsabs=1e-14, epsrel=1e-13)
        return float(self._s_table[k] + polish)

    def parameter_at(self, s: float) -> float:
        """Curve parameter t(s); PCHIP seed on the table, Newton polish."""
        if s < self.s_min - 1e-9 or s > self.s_max + 1e-9:
            raise OutsideTube("arc-length parameter outside the curve's range", s=s, s_range=[self.s_min, self.s_max])
        t = float(self._inverse_seed(s))
        for _ in range(NEWTON_MAX_ITER):
            step = (self.arc_length(t) - s) / self.speed(t)
            t -= step
            if abs(step) <= 1e-13 * (1.0 + abs(t)):
                return t
        raise NewtonDivergence("arc-length inversion did not converge", s=s)

    # local frames

    def frames(self, ts: np.ndarray) -> Dict[str, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        x, y = self.gamma[0].evaluate_array(ts), self.gamma[1].evaluate_array(ts)
        dx, dy = self.d1[0].evaluate_array(ts), self.d1[1].evaluate_array(ts)
        ddx, ddy = self.d2[0].evaluate_array(ts), self.d2[1].evaluate_array(ts)
        speed = np.hypot(dx, dy)
        tx, ty = dx / speed, dy / speed
        nx, ny = -ty, tx
        # second derivative with respect to arc length
        dot = dx * ddx + dy * ddy
        kx = ddx / speed**2 - dx * dot / speed**4
        ky = ddy / speed**2 - dy * dot / speed**4

        au, av = self.u_angle.evaluate_array(ts), self.v_angle.evaluate_array(ts)
        dau, dav = self.du_angle.evaluate_array(ts), self.dv_angle.evaluate_array(ts)
        u1, u2 = np.cos(au), np.sin(au)
        v1, v2 = np.cos(av), np.sin(av)
        return {
            "t": ts,
            "x": x,
            "y": y,
            "tx": tx,
            "ty": ty,
            "nx": nx,
            "ny": ny,
            "u1": u1,
            "u2": u2,
            "v1": v1,
            "v2": v2,
            "du1": -u2 * dau / speed,
            "dv1": -v2 * dav / speed,
            "gamma1": x * tx + y * ty,
            "gamma1_prime": 1.0 + x * kx + y * ky,
            "speed": speed,
        }

    def frame(self, t: float) -> FramePoint:
        f = {key: float(value[0]) for key, value in self.frames(np.array([t])).items()}
        tangent = np.array([f["tx"], f["ty"]])
        normal = np.array([f["nx"], f["ny"]])
        return FramePoint(
            t=t,
            position=np.array([f["x"], f["y"]]),
            tangent=tangent,
            normal=normal,
            u=f["u1"] * tangent + f["u2"] * normal,
            v=f["v1"] * tangent + f["v2"] * normal,
            u1=f["u1"],
            v1=f["v1"],
            du1=f["du1"],
            dv1=f["dv1"],
            gamma1=f["gamma1"],
            gamma1_prime=f["gamma1_prime"],
            speed=f["speed"],
        )

    def point(self, t: float) -> np.ndarray:
        return np.array([self.gamma[0](t), self.gamma[1](t)])

    def tangent(self, t: float) -> np.ndarray:
        d = np.array([self.d1[0](t), self.d1[1](t)])
        return d / np.hypot(d[0], d[1])

    def gamma1(self, t: float) -> float:
        """γ·γ' with γ' normalized."""
        dx, dy = self.d1[0](t), self.d1[1](t)
        return (self.gamma[0](t) * dx + self.gamma[1](t) * dy) / math.hypot(dx, dy)

    # nearest point

    def _stationarity(self, px: float, py: float, t: float) -> Tuple[float, float, float]:
        rx, ry = px - self.gamma[0](t), py - self.gamma[1](t)
        dx, dy = self.d1[0](t), self.d1[1](t)
        ddx, ddy = self.d2[0](t), self.d2[1](t)
        value = rx * dx + ry * dy
        slope = -(dx * dx + dy * dy) + rx * ddx + ry * ddy
        return value / math.hypot(dx, dy), value, slope

    def _newton(self, px: float, py: float, t: float) -> Optional[float]:
        for _ in range(NEWTON_MAX_ITER):
            residual, value, slope = self._stationarity(px, py, t)
            if abs(residual) <= STATIONARITY_TOL:
                return t
            if slope >= 0.0:
                return None
            t_next = min(max(t - value / slope, self.t_min), self.t_max)
            if t_next == t:
                # pinned at an end of the parameter range
                return t
            t = t_next
        return None

    def _golden(self, px: float, py: float, k: int) -> float:
        lo = self._seed_t[max(k - 1, 0)]
        hi = self._seed_t[min(k + 1, len(self._seed_t) - 1)]
        result = minimize_scalar(
            lambda t: (px - self.gamma[0](t)) ** 2 + (py - self.gamma[1](t)) ** 2,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        residual, _, _ = self._stationarity(px, py, result.x)
        if not result.success or abs(residual) > 1e-9:
            logger.error(f"Nearest-point search failed at p=({px}, {py}): residual {residual:.3e}")
            raise NewtonDivergence("nearest-point search did not converge", point=[px, py], residual=residual)
        return float(result.x)

    def project(self, p: Sequence[float], tube_radius: float) -> Tuple[float, float]:
        """
        Closest curve parameter to `p`.

        Returns:
            (t*, distance) in the curve's own parameter

        Raises:
            OutsideTube: p is not within tube_radius of an interior curve point
            NewtonDivergence: neither Newton nor the bounded fallback converged
        """
        px, py = float(p[0]), float(p[1])
        k = int(np.argmin((self._seed_x - px) ** 2 + (self._seed_y - py) ** 2))
        t_star = self._newton(px, py, float(self._seed_t[k]))
        if t_star is None:
            logger.debug(f"Newton projection fell back to bounded search at p=({px}, {py})")
            t_star = self._golden(px, py, k)
        distance = math.hypot(px - self.gamma[0](t_star), py - self.gamma[1](t_star))
        at_end = t_star in (self.t_min, self.t_max)
        if distance >= tube_radius or (at_end and abs(self._stationarity(px, py, t_star)[0]) > 1e-9):
            raise OutsideTube("point is outside the curve's tubular neighborhood", point=[px, py], distance=distance)
        return t_star, distance

    def min_separation(self, tube_radius: float, samples: int = 512) -> float:
        """Smallest distance between curve points whose arc separation exceeds 2·tube_radius."""
        ts = np.linspace(self.t_min, self.t_max, samples)
        xy = np.column_stack((self.gamma[0].evaluate_array(ts), self.gamma[1].evaluate_array(ts)))
        s = np.interp(ts, self._t_table, self._s_table)
        far = np.abs(s[:, None] - s[None, :]) > 2.0 * tube_radius
        if not far.any():
            return math.inf
        return float(cdist(xy, xy)[far].min())
