# apps/inversion/service.py
"""Explicit reconstruction of the profile from head wave data."""

from __future__ import annotations

import math
from functools import singledispatch
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from apps.core.exceptions import (
    DegenerateDenominator,
    InsufficientGrid,
    MissingLineIntegral,
    NoLimit,
    NonMonotoneGamma1,
    SceneIllFormed,
    SingularCoefficient,
    ZeroC,
)
from apps.inversion.derivatives import DataSource, data_derivatives, forward_difference, grid_derivatives
from apps.inversion.schemas import (
    DataDerivatives,
    DerivativeResiduals,
    NullityStatus,
    NullityVerdict,
    Recon1D,
    ReconMethod,
    SliceRecon,
    XrayEstimate,
)
from apps.metrics import record_reconstruction
from apps.scene import CurveScene, FieldMode, FlatScene2D, HyperplaneScene, Profile
from apps.transform import (
    DataGrid,
    ForwardMethod,
    QuadratureOptions,
    forward_evaluator,
    hwt_fixed_theta,
    integrate,
    profile_integral,
    scene_hash,
    write_table_csv,
)
from conf.enhanced_logging import get_logger
from conf.settings import get_settings

logger = get_logger(__name__)

OFFSET_MATCH_TOL = 1e-12


def _eps() -> float:
    return get_settings().HEADWAVE_EPS_COND


def _check_denominator(denom: np.ndarray, axis: np.ndarray, method: ReconMethod) -> float:
    magnitude = np.abs(denom)
    bad = np.flatnonzero(~(magnitude >= _eps()))
    if bad.size:
        x = float(axis[bad[0]])
        logger.error(f"{method.value}: denominator {magnitude[bad[0]]:.3e} below threshold at x={x}")
        raise DegenerateDenominator("inversion denominator vanishes", x=x, value=float(magnitude[bad[0]]))
    return float(magnitude.min())


def _total(total_integral: Optional[float], profile: Optional[Profile], options: Optional[QuadratureOptions]) -> float:
    if total_integral is not None:
        return float(total_integral)
    if profile is None:
        raise SceneIllFormed("the total integral of the profile must be supplied")
    logger.debug("Total integral not supplied, integrating the scene profile")
    return profile_integral(profile, options)


def _default_axis(domain: Tuple[float, float]) -> np.ndarray:
    return np.linspace(domain[0], domain[1], get_settings().HEADWAVE_LATTICE_POINTS)


def _assemble_flat(
    u1: np.ndarray, v1: np.ndarray, du1: np.ndarray, dv1: np.ndarray,
    deriv: DataDerivatives, total: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """f̃ = [β'(∂_x R − ζ) + α'∂_d R] / (α'β − β'α), α = 1/u1 + 1/v1, β = 1 − 1/v1."""
    alpha = 1.0 / u1 + 1.0 / v1
    beta = 1.0 - 1.0 / v1
    alpha_p = -du1 / u1**2 - dv1 / v1**2
    beta_p = dv1 / v1**2
    zeta = du1 / u1**2 * total
    denom = alpha_p * beta - beta_p * alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (beta_p * (deriv.dx - zeta) + alpha_p * deriv.dd) / denom
    return values, denom


def invert_2d_variable(
    scene: FlatScene2D,
    data: DataSource,
    total_integral: Optional[float] = None,
    axis: Optional[Sequence[float]] = None,
    options: Optional[QuadratureOptions] = None,
) -> Recon1D:
    """
    Recover f̃ from data at d = 0 and its first d-derivative.

    Args:
        scene: Flat scene with variable u1, v1
        data: DataGrid samples or a forward callback R(x, d)
        total_integral: ∫f̃ (computed from the scene profile when omitted)
        axis: Reconstruction nodes for a callback (reconstruction domain by default)

    Raises:
        DegenerateDenominator: |α'β − β'α| < HEADWAVE_EPS_COND at a node
        InsufficientGrid: not enough rows or nodes to difference
    """
    if axis is None and not isinstance(data, DataGrid):
        axis = _default_axis(scene.reconstruction_domain)
    deriv = data_derivatives(data, axis)
    total = _total(total_integral, scene.profile, options)
    xs = deriv.axis
    values, denom = _assemble_flat(
        scene.u1.evaluate_array(xs), scene.v1.evaluate_array(xs),
        scene.du1.evaluate_array(xs), scene.dv1.evaluate_array(xs),
        deriv, total,
    )
    denom_min = _check_denominator(denom, xs, ReconMethod.THM21)
    record_reconstruction(ReconMethod.THM21.value, xs.size)
    logger.info(f"Reconstructed {xs.size} nodes on [{xs[0]:.6g}, {xs[-1]:.6g}], min |denominator| {denom_min:.3e}")
    return Recon1D(axis=xs, values=values, denom_min=denom_min, method=ReconMethod.THM21,
                   scene_hash=scene_hash(scene))


CONSTANT_FORMULAS = {
    1: ReconMethod.CONSTANT_1,
    2: ReconMethod.CONSTANT_2,
    3: ReconMethod.CONSTANT_3,
}


def _constant_coefficient(u1: float, v1: float, formula: int) -> Tuple[float, float]:
    """(coefficient, denominator) for one constant-field formula."""
    if formula == 1:
        return -u1 * v1, u1 + v1
    if formula == 2:
        return v1, v1 - 1.0
    if formula == 3:
        return u1, 1.0 + u1
    raise SceneIllFormed(f"unknown constant-field formula {formula}", formula=formula)


def invert_2d_constant(
    data: DataSource,
    u1: float,
    v1: float,
    formula: int = 1,
    axis: Optional[Sequence[float]] = None,
) -> Recon1D:
    """
    Constant-field formulas.

    1: f̃ = −(u1v1/(u1 + v1))·∂_x R(x, 0)
    2: f̃ = (v1/(v1 − 1))·∂_d R(x, 0)
    3: f̃ = (u1/(1 + u1))·[∂_d R − ∂_x R](x, 0)

    Raises:
        SingularCoefficient: the formula's denominator vanishes
    """
    numerator, denominator = _constant_coefficient(u1, v1, formula)
    if abs(denominator) < _eps():
        raise SingularCoefficient(f"formula {formula} is singular for u1={u1}, v1={v1}",
                                  formula=formula, u1=u1, v1=v1)
    method = CONSTANT_FORMULAS[formula]
    deriv = data_derivatives(data, axis)
    if formula == 1:
        source = deriv.dx
    elif formula == 2:
        source = deriv.dd
    else:
        source = deriv.dd - deriv.dx
    values = numerator / denominator * source
    record_reconstruction(method.value, deriv.axis.size)
    logger.debug(f"{method.value}: coefficient {numerator / denominator:.6g}")
    return Recon1D(axis=deriv.axis, values=values, denom_min=abs(denominator), method=method,
                   scene_hash=data.scene_hash if isinstance(data, DataGrid) else "")


def invert_2d_constant_all(
    data: DataSource, u1: float, v1: float, axis: Optional[Sequence[float]] = None
) -> Dict[int, Recon1D]:
    """Every constant-field formula whose coefficient is finite."""
    results = {}
    for formula in CONSTANT_FORMULAS:
        try:
            results[formula] = invert_2d_constant(data, u1, v1, formula, axis)
        except SingularCoefficient as exc:
            logger.warning(f"Skipping formula {formula}: {exc.message}")
    if not results:
        raise SingularCoefficient("no constant-field formula applies", u1=u1, v1=v1)
    return results


# Single data row

def recursion_ratio(u1: float, v1: float) -> float:
    """C = (v1/u1)(u1 + 1)/(v1 − 1) in f̃(x + d0) = C·f̃(x) + (v1/(v1 − 1))·∂_x R(x, d0)."""
    if abs(u1) < _eps() or abs(v1 - 1.0) < _eps():
        raise SingularCoefficient("recursion factor undefined", u1=u1, v1=v1)
    return v1 / u1 * (u1 + 1.0) / (v1 - 1.0)


def _row_setup(row: Sequence[float], axis: Sequence[float], d0: float) -> Tuple[np.ndarray, np.ndarray, float, int]:
    row = np.asarray(row, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if row.shape != axis.shape or axis.size < 3:
        raise InsufficientGrid("data row must match an axis of at least 3 nodes")
    if not d0 > 0.0:
        raise SceneIllFormed("the data row must be taken at d0 > 0", d0=d0)
    h = float(axis[1] - axis[0])
    shift = d0 / h
    m = int(round(shift))
    if m < 1 or abs(shift - m) > 1e-9 * max(1.0, shift):
        raise InsufficientGrid("d0 must be a whole number of grid steps", d0=d0, step=h)
    if m >= axis.size:
        raise InsufficientGrid("grid is shorter than d0", d0=d0, width=float(axis[-1] - axis[0]))
    return row, axis, h, m


def _propagate(dx: np.ndarray, ratio: float, gain: float, m: int) -> np.ndarray:
    n = dx.size
    f = np.zeros(n)
    if abs(ratio) <= 1.0:
        for i in range(n - m):
            f[i + m] = ratio * f[i] + gain * dx[i]
    else:
        for i in range(n - m - 1, -1, -1):
            f[i] = (f[i + m] - gain * dx[i]) / ratio
    return f


def invert_partial_data(
    row: Sequence[float],
    axis: Sequence[float],
    u1: float,
    v1: float,
    d0: float,
    support: Optional[Tuple[float, float]] = None,
) -> Recon1D:
    """
    Rebuild f̃ from the single row R f(·, d0) for constant fields.

    The recursion starts from the end of the grid where f̃ is known to vanish:
    the left end when |C| ≤ 1, the right end otherwise, so errors are never amplified.

    Raises:
        InsufficientGrid: d0 is not a multiple of the grid step, or the
            starting window overlaps the support
    """
    row, axis, h, m = _row_setup(row, axis, d0)
    ratio = recursion_ratio(u1, v1)
    rightwards = abs(ratio) <= 1.0
    if support is not None:
        a, b = support
        if rightwards and axis[m - 1] >= a:
            raise InsufficientGrid("grid must start a full d0 left of the support", support=list(support))
        if not rightwards and axis[-m] <= b:
            raise InsufficientGrid("grid must end a full d0 right of the support", support=list(support))
    dx = np.gradient(row, h, edge_order=2)
    values = _propagate(dx, ratio, v1 / (v1 - 1.0), m)
    logger.info(f"Propagated the single-row recursion {'rightwards' if rightwards else 'leftwards'}, C={ratio:.6g}")
    record_reconstruction(ReconMethod.PARTIAL.value, axis.size)
    return Recon1D(axis=axis, values=values, denom_min=min(abs(ratio), abs(v1 - 1.0)), method=ReconMethod.PARTIAL)


def partial_data_nullity_check(
    row: Sequence[float],
    axis: Sequence[float],
    u1: float,
    v1: float,
    d0: float,
    support: Tuple[float, float],
    candidate: Optional[Union[Callable[[float], float], Sequence[float]]] = None,
    tol: float = 1e-8,
) -> NullityVerdict:
    """
    Check a data row against the recursion f̃(x + d0) = C·f̃(x) + (v1/(v1 − 1))·∂_x R(x, d0).

    Without a candidate the recursion is propagated from outside the support and the
    row is consistent with zero exactly when the propagated profile vanishes. With a
    candidate (callable or samples on `axis`) every recursion residual is checked, as is
    vanishing outside `support`; the first offending node is reported.
    """
    row, axis, h, m = _row_setup(row, axis, d0)
    ratio = recursion_ratio(u1, v1)
    gain = v1 / (v1 - 1.0)
    dx = np.gradient(row, h, edge_order=2)

    if candidate is None:
        values = _propagate(dx, ratio, gain, m)
        bad = np.flatnonzero(np.abs(values) > tol)
        residual = float(np.max(np.abs(values)))
    else:
        if callable(candidate):
            values = np.array([candidate(float(x)) for x in axis])
        else:
            values = np.asarray(candidate, dtype=float)
        scale = tol * max(1.0, float(np.max(np.abs(values))))
        outside = (axis < support[0]) | (axis > support[1])
        recursion = np.zeros(axis.size)
        recursion[: axis.size - m] = values[m:] - ratio * values[:-m] - gain * dx[:-m]
        residual_at = np.maximum(np.abs(recursion), np.where(outside, np.abs(values), 0.0))
        bad = np.flatnonzero(residual_at > scale)
        residual = float(np.max(residual_at))

    if bad.size == 0:
        return NullityVerdict(status=NullityStatus.CONSISTENT, ratio=ratio, residual=residual)
    x = float(axis[bad[0]])
    logger.info(f"Recursion breaks at x={x} (C={ratio:.6g}, residual {residual:.3e})")
    return NullityVerdict(status=NullityStatus.VIOLATION, ratio=ratio, x=x, residual=residual)


# Fixed direction on the hyperplane

def _find_total(totals: Mapping[float, float], offset: float) -> float:
    for key, value in totals.items():
        if abs(float(key) - offset) <= OFFSET_MATCH_TOL:
            return float(value)
    logger.error(f"No line integral supplied for the line at offset {offset}")
    raise MissingLineIntegral("total line integral missing", offset=offset)


def _line_axis(scene: HyperplaneScene) -> np.ndarray:
    domain = scene.reconstruction_domain
    corners = [(x1, x2) for x1 in domain.interval(0) for x2 in domain.interval(1)]
    s = [scene.line_coordinates(c)[0] for c in corners]
    return _default_axis((min(s), max(s)))


def invert_fixed_theta(
    scene: HyperplaneScene,
    data: Mapping[float, DataSource],
    total_line_integrals: Mapping[float, float],
    axis: Optional[Sequence[float]] = None,
) -> SliceRecon:
    """
    Line-by-line reconstruction for the fixed direction θ0.

    `data` maps each line offset to samples or a callback in (s, d); derivatives of the
    λ's along θ0 are taken symbolically.

    Raises:
        MissingLineIntegral: an offset has no total line integral
        DegenerateDenominator: |βDα − αDβ| < HEADWAVE_EPS_COND on some line
    """
    lines = {}
    theta = np.asarray(scene.theta0)
    for offset, source in sorted(data.items()):
        offset = float(offset)
        total = _find_total(total_line_integrals, offset)
        nodes = axis
        if nodes is None and not isinstance(source, DataGrid):
            nodes = _line_axis(scene)
        deriv = data_derivatives(source, nodes)
        s = deriv.axis
        x1 = s * theta[0] + offset * scene.theta_perp[0]
        x2 = s * theta[1] + offset * scene.theta_perp[1]
        values, denom = _assemble_flat(
            scene.lambda_u.evaluate_array(x1, x2), scene.lambda_v.evaluate_array(x1, x2),
            scene.d_lambda_u.evaluate_array(x1, x2), scene.d_lambda_v.evaluate_array(x1, x2),
            deriv, total,
        )
        denom_min = _check_denominator(denom, s, ReconMethod.THM31)
        lines[offset] = Recon1D(axis=s, values=values, denom_min=denom_min, method=ReconMethod.THM31,
                                scene_hash=scene_hash(scene))
        record_reconstruction(ReconMethod.THM31.value, s.size)
    logger.info(f"Reconstructed {len(lines)} lines along θ0={tuple(scene.theta0)}")
    return SliceRecon(theta0=scene.theta0, lines=lines)


def xray_limit(
    scene: HyperplaneScene,
    forward: Optional[Callable[[np.ndarray, float], float]] = None,
    at: Sequence[float] = (0.0, 0.0),
    s_values: Sequence[float] = (-10.0, -20.0, -40.0),
    tol: float = 1e-8,
    step: Optional[float] = None,
) -> XrayEstimate:
    """
    X-ray value ∫f̃(x′ + tθ0)dt from the far-left behaviour of ∂_d R f.

    Left of the support ∂_d R f(x′ + sθ0, 0) = −D_θ0β·Xf̃ with β = 1 − 1/λ_v, so each
    sample yields an estimate; samples run towards −∞ until two successive estimates agree.

    Raises:
        ZeroC: D_θ0β vanishes at the farthest sample
        NoLimit: successive estimates never agree within `tol`
    """
    if forward is None:
        def forward(point, d):
            return hwt_fixed_theta(scene, point, d)
    theta = np.asarray(scene.theta0)
    base = np.asarray(at, dtype=float)
    samples = sorted((float(s) for s in s_values), reverse=True)
    points = [base + s * theta for s in samples]
    d_beta = np.array([
        scene.d_lambda_v(*p) / scene.lambda_v(*p) ** 2 for p in points
    ])
    if abs(d_beta[-1]) < _eps():
        logger.error(f"D_θ0 β = {d_beta[-1]:.3e} at s={samples[-1]}: no X-ray limit")
        raise ZeroC("D_θ0 β tends to zero along the samples", s=samples[-1], value=float(d_beta[-1]))
    if step is None:
        step = get_settings().HEADWAVE_FD_REL_STEP * max(scene.reconstruction_domain.widths())

    estimates, raws = [], []
    for k, (s, p) in enumerate(zip(samples, points)):
        raw = float(forward_difference(forward(p, 0.0), forward(p, step), forward(p, 2.0 * step), step))
        raws.append(raw)
        estimates.append(raw / -d_beta[k] if abs(d_beta[k]) >= _eps() else math.nan)
        logger.debug(f"X-ray sample s={s}: ∂_d R = {raw:.12g}, estimate {estimates[-1]:.12g}")
        if k and abs(estimates[k] - estimates[k - 1]) < tol * max(1.0, abs(estimates[k])):
            return XrayEstimate(xray=estimates[k], raw_limit=raw, ratio=float(d_beta[k]),
                                s_values=samples[: k + 1], estimates=estimates)
    raise NoLimit("sample sequence did not settle", s_values=samples, estimates=estimates)


# Curve

def invert_curve(
    scene: CurveScene,
    data: DataSource,
    total_integral: Optional[float] = None,
    axis: Optional[Sequence[float]] = None,
    options: Optional[QuadratureOptions] = None,
) -> Recon1D:
    """
    Recover f̃ at γ1(s0) from data along the curve, then resample onto a uniform argument grid.

    Denominator α'(1 − γ1'β) + β'αγ1' with α = 1/u1 + 1/v1, β = 1/v1.

    Raises:
        DegenerateDenominator
        NonMonotoneGamma1: γ1 turns back on the grid (raw pairs attached as `recon`)
    """
    if axis is None and not isinstance(data, DataGrid):
        axis = _default_axis(scene.reconstruction_domain)
    deriv = data_derivatives(data, axis)
    total = _total(total_integral, scene.profile, options)
    s = deriv.axis
    geometry = scene.geometry
    f = geometry.frames(np.array([scene.parameter_at(float(si)) for si in s]))
    u1, v1, du1, dv1 = f["u1"], f["v1"], f["du1"], f["dv1"]
    g1, g1p = f["gamma1"], f["gamma1_prime"]
    alpha = 1.0 / u1 + 1.0 / v1
    beta = 1.0 / v1
    alpha_p = -du1 / u1**2 - dv1 / v1**2
    beta_p = -dv1 / v1**2
    zeta = du1 / u1**2 * total
    denom = alpha_p * (1.0 - g1p * beta) + beta_p * alpha * g1p
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (alpha_p * deriv.dd - beta_p * (deriv.dx - zeta)) / denom
    denom_min = _check_denominator(denom, s, ReconMethod.THM41)
    record_reconstruction(ReconMethod.THM41.value, s.size)

    steps = np.diff(g1)
    if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
        changes = np.flatnonzero((np.sign(steps) != np.sign(steps[0])) | (steps == 0.0))
        turn = int(changes[0]) + 1 if changes.size else 1
        logger.error(f"γ1 is not monotone on the grid (turns near s={s[turn]})")
        raw_recon = Recon1D(axis=s, values=raw, denom_min=denom_min, method=ReconMethod.THM41,
                            scene_hash=scene_hash(scene), source_axis=s, arguments=g1, raw_values=raw)
        raise NonMonotoneGamma1("γ1 changes direction; only raw pairs are available",
                                recon=raw_recon, s=float(s[turn]))
    order = np.argsort(g1)
    interpolant = PchipInterpolator(g1[order], raw[order])
    uniform = np.linspace(g1[order][0], g1[order][-1], s.size)
    return Recon1D(
        axis=uniform,
        values=interpolant(uniform),
        denom_min=denom_min,
        method=ReconMethod.THM41,
        scene_hash=scene_hash(scene),
        source_axis=s,
        arguments=g1,
        raw_values=raw,
    )


# Derivative identities

def _primitive(profile: Profile, options: QuadratureOptions) -> Tuple[Callable[[float], float], Callable[[float], float]]:
    a, b = profile.support

    def head(y: float) -> float:
        return integrate(profile, a, min(max(y, a), b), options, "head")

    def tail(y: float) -> float:
        return integrate(profile, min(max(y, a), b), b, options, "tail")

    return head, tail


def _fd_pair(forward: Callable[[float, float], float], x: float, d: float, h: float) -> Tuple[float, float]:
    dx = (forward(x + h, d) - forward(x - h, d)) / (2.0 * h)
    if d >= h:
        dd = (forward(x, d + h) - forward(x, d - h)) / (2.0 * h)
    else:
        dd = float(forward_difference(forward(x, d), forward(x, d + h), forward(x, d + 2.0 * h), h))
    return dx, dd


def _residuals(points, pairs, truths) -> DerivativeResiduals:
    return DerivativeResiduals(
        points=[list(map(float, p)) for p in points],
        dx_residual=[abs(fd[0] - tr[0]) for fd, tr in zip(pairs, truths)],
        dd_residual=[abs(fd[1] - tr[1]) for fd, tr in zip(pairs, truths)],
    )


@singledispatch
def derivative_identity_residuals(scene, points, forward=None, options=None, step=None) -> DerivativeResiduals:
    """
    |finite difference − analytic derivative| of the data in the gliding variable and in d.

    `points` are (x, d) pairs (flat and curve, x the arc length on curves) or
    (x1, x2, d) triples (hyperplane). The forward operator defaults to the reduced form.
    """
    raise SceneIllFormed(f"unsupported scene type {type(scene).__name__}")


def _flat_truth(scene: FlatScene2D, head, tail, x: float, d: float) -> Tuple[float, float]:
    f = scene.profile
    y = x + d
    u1, du1 = scene.u1(x), scene.du1(x)
    v1, dv1 = scene.v1(y), scene.dv1(y)
    ascent = tail(y) * dv1 / v1**2
    dx_true = -f(x) / u1 + du1 / u1**2 * head(x) + f(y) - f(x) - f(y) / v1 - ascent
    dd_true = f(y) * (1.0 - 1.0 / v1) - ascent
    return dx_true, dd_true


def _curve_truth(scene: CurveScene, head, tail, s: float, d: float) -> Tuple[float, float]:
    f = scene.profile
    start, end = scene.frame(s), scene.frame(s + d)
    f_start, f_end = f(start.gamma1), f(end.gamma1)
    ascent = tail(end.gamma1) * end.dv1 / end.v1**2
    dx_true = (
        -f_start * start.gamma1_prime / start.u1
        + start.du1 / start.u1**2 * head(start.gamma1)
        + f_end - f_start
        - f_end * end.gamma1_prime / end.v1
        - ascent
    )
    dd_true = f_end - f_end * end.gamma1_prime / end.v1 - ascent
    return dx_true, dd_true


def _identity_setup(scene, forward, options, step):
    if scene.mode is not FieldMode.PROFILE:
        raise SceneIllFormed("derivative identities need a profile-mode scene")
    options = options or QuadratureOptions()
    forward = forward or forward_evaluator(scene, ForwardMethod.REDUCED, options)
    lo, hi = scene.reconstruction_domain
    h = step or get_settings().HEADWAVE_FD_REL_STEP * (hi - lo)
    head, tail = _primitive(scene.profile, options)
    return forward, h, head, tail


@derivative_identity_residuals.register
def _(scene: FlatScene2D, points, forward=None, options=None, step=None) -> DerivativeResiduals:
    forward, h, head, tail = _identity_setup(scene, forward, options, step)
    pairs = [_fd_pair(forward, x, d, h) for x, d in points]
    truths = [_flat_truth(scene, head, tail, x, d) for x, d in points]
    return _residuals(points, pairs, truths)


@derivative_identity_residuals.register
def _(scene: HyperplaneScene, points, forward=None, options=None, step=None) -> DerivativeResiduals:
    options = options or QuadratureOptions()
    h = step or get_settings().HEADWAVE_FD_REL_STEP * max(scene.reconstruction_domain.widths())
    visited, dx_res, dd_res = [], [], []
    for x1, x2, d in points:
        s, offset = scene.line_coordinates((x1, x2))
        if forward is None:
            def line_forward(si, di, c=offset):
                return hwt_fixed_theta(scene, scene.line_point(si, c), di, options)
        else:
            def line_forward(si, di, c=offset):
                return forward(scene.line_point(si, c), di)
        # the slice carries λ along the line, so its x-derivative is D_θ0 λ
        one = derivative_identity_residuals(scene.slice_scene(offset), [(s, d)], line_forward, options, h)
        visited.append([float(x1), float(x2), float(d)])
        dx_res += one.dx_residual
        dd_res += one.dd_residual
    return DerivativeResiduals(points=visited, dx_residual=dx_res, dd_residual=dd_res)


@derivative_identity_residuals.register
def _(scene: CurveScene, points, forward=None, options=None, step=None) -> DerivativeResiduals:
    forward, h, head, tail = _identity_setup(scene, forward, options, step)
    pairs = [_fd_pair(forward, s, d, h) for s, d in points]
    truths = [_curve_truth(scene, head, tail, s, d) for s, d in points]
    return _residuals(points, pairs, truths)


def grid_identity_residuals(
    scene: Union[FlatScene2D, CurveScene], grid: DataGrid, options: Optional[QuadratureOptions] = None
) -> DerivativeResiduals:
    """
    The identities at d = 0 against sampled data, differenced exactly as the inversions do.

    Residuals include the O(h²) truncation of the grid stencils.
    """
    if isinstance(scene, HyperplaneScene):
        raise SceneIllFormed("grid identity checks cover flat and curve scenes")
    if scene.mode is not FieldMode.PROFILE:
        raise SceneIllFormed("derivative identities need a profile-mode scene")
    truth = _flat_truth if isinstance(scene, FlatScene2D) else _curve_truth
    deriv = grid_derivatives(grid)
    head, tail = _primitive(scene.profile, options or QuadratureOptions())
    points = [(float(x), 0.0) for x in deriv.axis]
    truths = [truth(scene, head, tail, x, 0.0) for x, _ in points]
    return _residuals(points, list(zip(deriv.dx, deriv.dd)), truths)


# Files

def write_recon_csv(
    recon: Union[Recon1D, SliceRecon],
    path: Union[str, Path],
    truth: Optional[Callable[..., float]] = None,
) -> Path:
    """
    Columns `x,f_recon[,f_true,abs_err]` (or `x1,x2,f_recon[...]` for line-by-line results).

    `truth` takes the argument (x, or x1 and x2) and enables the error columns.
    """
    if isinstance(recon, SliceRecon):
        table = recon.points()
        columns = ["x1", "x2", "f_recon"]
        header = {"method": ReconMethod.THM31.value, "denom_min": repr(recon.denom_min)}
        coords = table[:, :2]
        estimate = table[:, 2]
    else:
        table = np.column_stack((recon.axis, recon.values))
        columns = ["x", "f_recon"]
        header = {"method": recon.method.value, "denom_min": repr(recon.denom_min), "scene_hash": recon.scene_hash}
        coords = recon.axis[:, None]
        estimate = recon.values
    if truth is not None:
        expected = np.array([truth(*c) for c in coords])
        table = np.column_stack((table, expected, np.abs(estimate - expected)))
        columns += ["f_true", "abs_err"]
    return write_table_csv(path, header, columns, table)
