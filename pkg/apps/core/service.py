# apps/core/service.py
"""
The batch commands as library calls.

Each `run_*` function takes a parsed RunConfig, does the work, writes the
configured files and returns a result model; the CLI only adds option
overrides, printing and exit codes.
"""

from __future__ import annotations

from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from apps.core.config import GaugeKind, RunConfig, line_paths, suffixed
from apps.core.exceptions import (
    AssumptionViolation,
    ConfigError,
    DegenerateDenominator,
    HashMismatch,
    NumericalError,
    SceneError,
    SceneIllFormed,
)
from apps.core.schemas import ForwardSummary, GaugeOutcome, InvertSummary, ReconStats, VerifyCheck, VerifySuite
from apps.expr import ExprAST, parse
from apps.gauge import (
    Annihilation,
    GaugeReport,
    constant_contract,
    depth_null_generator,
    fixed_theta_contract,
    flat_null_scene,
    gauge_fixed_theta,
    gauge_forward_constant,
    gauge_forward_general,
    potential_from_null_general,
    potentials_fixed_theta,
    potentials_from_null_constant,
    verify_annihilation,
)
from apps.inversion import (
    Recon1D,
    SliceRecon,
    derivative_identity_residuals,
    grid_identity_residuals,
    invert_2d_constant,
    invert_2d_constant_all,
    invert_2d_variable,
    invert_curve,
    invert_fixed_theta,
    invert_partial_data,
    write_recon_csv,
)
from apps.metrics import quadrature_stats
from apps.scene import AssumptionReport, Box, CurveScene, FieldMode, FlatScene2D, HyperplaneScene, validate
from apps.transform import (
    DataGrid,
    ForwardMethod,
    forward_evaluator,
    line_integral,
    read_datagrid_csv,
    scene_hash,
    sweep,
    write_datagrid_csv,
)
from apps.transform.io import atomic_write
from conf.enhanced_logging import get_logger

logger = get_logger(__name__)

Scene = Union[FlatScene2D, HyperplaneScene, CurveScene]
Recon = Union[Recon1D, SliceRecon]

# Verdicts that only matter once data is inverted.
INVERSION_ONLY = (".nondegeneracy", ".denominator")

IDENTITY_TOL = 1e-6
AGREEMENT_FACTOR = 10.0
# Tube-frame legs on curved γ depart from the reduced form by O(leg height × curvature),
# so curve agreement is measured relative to the largest reduced value.
CURVE_AGREEMENT_REL = 0.1
GRID_TRUNCATION = 10.0
ROUND_TRIP_TOL = {"flat2d": 1e-4, "hyperplane": 1e-3, "curve": 5e-4}
GLIDE_POINTS = 64

FLAT_METHODS = ("thm21", "rmk22-1", "rmk22-2", "rmk22-3", "all", "partial")


# Shared helpers

def _required(value: Optional[Path], key: str, flag: str) -> Path:
    if value is None:
        raise ConfigError(f"no {key}: set it in the config or pass {flag}", key=key)
    return Path(value)


def _gate(scene: Scene, inversion: bool) -> AssumptionReport:
    """Validate the scene; forward runs tolerate the inversion-only verdicts."""
    report = validate(scene)
    failed = [v.name for v in report.failed() if inversion or not v.name.endswith(INVERSION_ONLY)]
    if failed:
        logger.error(f"Scene fails {', '.join(failed)}")
        raise AssumptionViolation(f"scene fails {failed[0]}", report=report, failed=failed)
    return report


def _offsets(config: RunConfig) -> Tuple[float, ...]:
    return config.grid.offsets if isinstance(config.scene, HyperplaneScene) else (0.0,)


def _with_update(scene: Scene, **update) -> Scene:
    # Rebuilt through the constructor so validators and cached slices start fresh.
    return type(scene)(**{**dict(scene), **update})


def _constant_fields(scene: FlatScene2D) -> Tuple[float, float]:
    if not (scene.u1.is_constant and scene.v1.is_constant):
        raise SceneIllFormed("this method needs constant u1 and v1")
    return float(scene.u1(0.0)), float(scene.v1(0.0))


def _truth(scene: Scene) -> Optional[Callable[..., float]]:
    if scene.mode is not FieldMode.PROFILE:
        return None
    if isinstance(scene, HyperplaneScene):
        profile, support = scene.profile_nd, scene.support
        return lambda x1, x2: float(profile(x1, x2)) if support.contains((x1, x2)) else 0.0
    return scene.profile


# Forward

def run_forward(config: RunConfig, out: Optional[Path] = None, threads: Optional[int] = None) -> ForwardSummary:
    """
    Sweep the configured grid and write one data file per swept line.

    Raises:
        AssumptionViolation: the scene fails a forward-relevant assumption
        ConfigError: no output path
    """
    scene = config.scene
    _gate(scene, inversion=False)
    path = _required(out or config.output.data, "output.data", "--out")
    axis1, axis2 = config.grid.axis1(), config.grid.axis2()
    offsets = _offsets(config)
    grids = [sweep(scene, axis1, axis2, config.quad, config.method, threads, offset=c) for c in offsets]
    paths = [write_datagrid_csv(grid, p) for grid, p in zip(grids, line_paths(path, offsets))]
    values = np.concatenate([grid.values.ravel() for grid in grids])
    summary = ForwardSummary(
        grids=grids,
        paths=paths,
        nodes=int(values.size),
        min_value=float(values.min()),
        max_value=float(values.max()),
        quadrature=quadrature_stats(),
    )
    logger.info(f"Forward sweep of {summary.nodes} nodes written to {', '.join(map(str, paths))}")
    return summary


# Inversion

def _invert_method(scene: Scene, requested: str) -> str:
    if isinstance(scene, HyperplaneScene):
        allowed, default = ("thm31",), "thm31"
    elif isinstance(scene, CurveScene):
        allowed, default = ("thm41",), "thm41"
    else:
        allowed = FLAT_METHODS
        default = "all" if scene.u1.is_constant and scene.v1.is_constant else "thm21"
    if requested == "auto":
        return default
    if requested not in allowed:
        raise ConfigError(
            f"invert.method {requested!r} does not apply to {scene.kind} scenes; use auto or {', '.join(allowed)}",
            key="invert.method",
        )
    return requested


def _load_grid(path: Path, expected: str, override_hash: bool) -> DataGrid:
    grid = read_datagrid_csv(path)
    if grid.scene_hash != expected:
        if not override_hash:
            logger.error(f"Scene hash mismatch for {path}: data {grid.scene_hash}, config {expected}")
            raise HashMismatch("data was produced by a different scene",
                               path=str(path), data_hash=grid.scene_hash, scene_hash=expected)
        logger.warning(f"!!! IGNORING scene hash mismatch for {path} (--override-hash): "
                       f"data {grid.scene_hash}, config {expected} !!!")
    return grid


def _row_index(grid: DataGrid, d0: float) -> int:
    matches = np.flatnonzero(np.isclose(grid.axis2, d0, rtol=0.0, atol=1e-12 + 1e-9 * abs(d0)))
    if matches.size == 0:
        raise ConfigError(f"invert.d0 = {d0} is not a row of the data grid", key="invert.d0")
    return int(matches[0])


def _reconstruct(
    scene: Scene,
    method: str,
    grids: Sequence[DataGrid],
    offsets: Sequence[float],
    total: Optional[float],
    config: RunConfig,
) -> Dict[str, Recon]:
    if isinstance(scene, HyperplaneScene):
        _gate(scene, inversion=True)
        totals = {c: total if total is not None else line_integral(scene, c, config.quad) for c in offsets}
        return {method: invert_fixed_theta(scene, dict(zip(offsets, grids)), totals)}
    grid = grids[0]
    if isinstance(scene, CurveScene):
        _gate(scene, inversion=True)
        return {method: invert_curve(scene, grid, total, options=config.quad)}
    if method == "thm21":
        _gate(scene, inversion=True)
        return {method: invert_2d_variable(scene, grid, total, options=config.quad)}
    u1, v1 = _constant_fields(scene)
    _gate(scene, inversion=False)
    if method == "all":
        return {recon.method.value: recon for recon in invert_2d_constant_all(grid, u1, v1).values()}
    if method == "partial":
        d0 = config.invert.d0 if config.invert.d0 is not None else float(grid.axis2[-1])
        j = _row_index(grid, d0)
        recon = invert_partial_data(grid.values[:, j], grid.axis1, u1, v1, float(grid.axis2[j]),
                                    support=scene.profile.support if scene.profile else None)
        return {recon.method.value: recon}
    return {method: invert_2d_constant(grid, u1, v1, int(method[-1]))}


def _errors(recon: Recon, truth: Callable[..., float]) -> np.ndarray:
    if isinstance(recon, SliceRecon):
        table = recon.points()
        return np.abs(table[:, 2] - np.array([truth(x1, x2) for x1, x2 in table[:, :2]]))
    return recon.error_against(truth)


def _values(recon: Recon) -> np.ndarray:
    return recon.points()[:, 2] if isinstance(recon, SliceRecon) else recon.values


def _pairwise(recons: Dict[str, Recon]) -> Dict[str, float]:
    gaps = {}
    for a, b in combinations(sorted(recons), 2):
        va, vb = _values(recons[a]), _values(recons[b])
        if va.shape == vb.shape:
            gaps[f"{a}/{b}"] = float(np.max(np.abs(va - vb)))
    return gaps


def run_invert(
    config: RunConfig,
    data: Optional[Path] = None,
    out: Optional[Path] = None,
    total_integral: Optional[float] = None,
    method: Optional[str] = None,
    override_hash: bool = False,
) -> InvertSummary:
    """
    Read forward data, reconstruct the profile and write one CSV per method.

    Raises:
        HashMismatch: the data was written for another scene (unless override_hash)
        AssumptionViolation: the scene fails the assumptions the method needs
        DegenerateDenominator: a reconstruction denominator vanishes on the grid
    """
    scene = config.scene
    if scene.mode is not FieldMode.PROFILE:
        raise SceneIllFormed("inversion needs a profile-mode scene")
    data_path = _required(data or config.output.data, "output.data", "--data")
    recon_path = _required(out or config.output.recon, "output.recon", "--out")
    method = _invert_method(scene, method or config.invert.method)
    if method != "partial":
        config.require_derivative_grid()
    total = total_integral if total_integral is not None else config.invert.total_integral
    expected = scene_hash(scene)
    offsets = _offsets(config)
    grids = [_load_grid(p, expected, override_hash) for p in line_paths(data_path, offsets)]

    recons = _reconstruct(scene, method, grids, offsets, total, config)
    truth = _truth(scene)
    stats = []
    for tag, recon in recons.items():
        path = recon_path if len(recons) == 1 else suffixed(recon_path, tag)
        write_recon_csv(recon, path, truth)
        errors = _errors(recon, truth) if truth is not None else None
        stats.append(ReconStats(
            method=tag,
            nodes=int(_values(recon).size),
            denom_min=recon.denom_min,
            path=path,
            max_error=None if errors is None else float(errors.max()),
            mean_error=None if errors is None else float(errors.mean()),
        ))
        logger.info(f"Reconstruction {tag} written to {path}")
    return InvertSummary(
        recons=recons,
        stats=stats,
        pairwise=_pairwise(recons) if len(recons) > 1 else {},
        hash_overridden=any(grid.scene_hash != expected for grid in grids),
    )


# Gauge

def _boundary_max(phi: ExprAST, box: Box) -> float:
    """max |φ| on the part of the gliding set under the box."""
    axes = [np.linspace(lo, hi, GLIDE_POINTS) for lo, hi in zip(box.lower[:-1], box.upper[:-1])]
    mesh = np.meshgrid(*axes, indexing="ij")
    values = phi.evaluate_array(*mesh, np.zeros_like(mesh[0]))
    return float(np.max(np.abs(values)))


def _curve_boundary_max(phi: ExprAST, scene: CurveScene) -> float:
    points = np.array([scene.position(s) for s in np.linspace(*scene.s_range, GLIDE_POINTS)])
    return float(np.max(np.abs(phi.evaluate_array(points[:, 0], points[:, 1]))))


def _gauge_constant(config: RunConfig) -> Tuple[ExprAST, Annihilation, GaugeReport]:
    scene, spec = config.scene, config.gauge
    _constant_fields(scene)
    if scene.box is None:
        raise SceneIllFormed("a support box is needed for the gauge", key="scene.box")
    phi, box = scene.field2d, scene.box
    u, v = scene.u_vector(0.0), scene.v_vector(0.0)
    f = gauge_forward_constant(phi, u, v, box)
    annihilation = verify_annihilation(flat_null_scene(f, box, u, v), config.grid.axis1(), config.grid.axis2(),
                                       config.quad, kind="constant")
    boundary = max(_boundary_max(phi, box), annihilation.gliding_residual)
    pde = (0.0, 0.0)
    if spec.recover:
        psi, potential = potentials_from_null_constant(f, u, v, box, config.quad)
        contract = constant_contract(f, psi, potential, u, v, box, spec.points)
        pde = (max(contract["psi"], contract["phi"]), contract["phi_swapped"])
        boundary = max(boundary, contract["psi_boundary"], contract["phi_boundary"])
    report = GaugeReport(
        kind="constant",
        max_forward_residual=annihilation.max_residual,
        pde_residuals=pde,
        boundary_residual=boundary,
    )
    return f, annihilation, report


def _gauge_general(config: RunConfig) -> Tuple[ExprAST, Annihilation, GaugeReport]:
    scene, spec = config.scene, config.gauge
    if scene.u_ext is None or scene.v_ext is None:
        raise SceneIllFormed("general gauges need the extended fields u_ext and v_ext", key="scene.u_ext1")
    if scene.box is None:
        raise SceneIllFormed("a support box is needed for the gauge", key="scene.box")
    phi = scene.field2d
    gauge = gauge_forward_general(phi, scene.u_ext, scene.v_ext, scene.box)
    null = _with_update(scene, field2d=gauge.field)
    annihilation = verify_annihilation(null, config.grid.axis1(), config.grid.axis2(), config.quad, kind="general")
    on_curve = isinstance(scene, CurveScene)
    boundary = _curve_boundary_max(phi, scene) if on_curve else _boundary_max(phi, scene.box)
    boundary = max(boundary, annihilation.gliding_residual)
    kind = "general-curve" if on_curve else "general-flat"
    if not spec.recover:
        report = GaugeReport(kind=kind, max_forward_residual=annihilation.max_residual,
                             boundary_residual=boundary, ordering_gap=gauge.ordering_gap)
        return gauge.field, annihilation, report
    _, recovered = potential_from_null_general(null, config.quad, points=spec.points)
    report = recovered.model_copy(update={
        "max_forward_residual": max(recovered.max_forward_residual, annihilation.max_residual),
        "boundary_residual": max(recovered.boundary_residual, boundary),
        "ordering_gap": max(recovered.ordering_gap, gauge.ordering_gap),
    })
    return gauge.field, annihilation, report


def _gauge_fixed_theta(config: RunConfig) -> Tuple[ExprAST, Annihilation, GaugeReport]:
    scene, spec = config.scene, config.gauge
    if scene.box is None:
        raise SceneIllFormed("a 3D support box is needed for the gauge", key="scene.box")
    phi = scene.field3d
    f, annihilation = gauge_fixed_theta(phi, scene, axis1=config.grid.axis1(), axis2=config.grid.axis2(),
                                        offsets=config.grid.offsets, options=config.quad)
    boundary = max(_boundary_max(phi, scene.box), annihilation.gliding_residual)
    pde = (0.0, 0.0)
    if spec.recover:
        psi, potential = potentials_fixed_theta(f, scene)
        contract = fixed_theta_contract(f, psi, potential, scene, points=spec.points)
        pde = (max(contract["psi"], contract["phi"]), contract["phi_swapped"])
    report = GaugeReport(
        kind="fixed-theta",
        max_forward_residual=annihilation.max_residual,
        pde_residuals=pde,
        boundary_residual=boundary,
    )
    return f, annihilation, report


def _gauge_depth_null(config: RunConfig) -> Tuple[ExprAST, Annihilation, GaugeReport]:
    h = parse(config.gauge.h, ("s",))
    g, annihilation = depth_null_generator(h, config.scene, axis1=config.grid.axis1(), axis2=config.grid.axis2(),
                                           offsets=config.grid.offsets, options=config.quad)
    report = GaugeReport(
        kind="depth-null",
        max_forward_residual=annihilation.max_residual,
        boundary_residual=max(abs(h(0.0)), annihilation.gliding_residual),
    )
    return g, annihilation, report


GAUGE_RUNNERS = {
    GaugeKind.CONSTANT: _gauge_constant,
    GaugeKind.GENERAL: _gauge_general,
    GaugeKind.FIXED_THETA: _gauge_fixed_theta,
    GaugeKind.DEPTH_NULL: _gauge_depth_null,
}


def run_gauge(config: RunConfig, out: Optional[Path] = None) -> GaugeOutcome:
    """
    Generate a kernel element from the configured potential and certify it.

    The report is returned whatever its residuals; callers decide whether an
    exceeded threshold is fatal.

    Raises:
        ConfigError: the config has no [gauge] section
        GaugeError: the construction's preconditions fail (boundary values, frame, h)
    """
    if config.gauge is None:
        raise ConfigError("gauge runs need a [gauge] section", key="gauge")
    field, annihilation, report = GAUGE_RUNNERS[config.gauge.kind](config)
    paths: List[Path] = []
    report_path = out or config.output.report
    if report_path is not None:
        paths.append(atomic_write(report_path, [f"field = {field}", *report.to_text().splitlines()]))
    if config.output.residuals is not None:
        grids = list(annihilation.grids.values())
        for k, grid in enumerate(grids):
            target = config.output.residuals if len(grids) == 1 else suffixed(config.output.residuals, f"sweep{k}")
            paths.append(write_datagrid_csv(grid, target))
    exceeded = report.exceeded()
    if exceeded:
        logger.warning(f"Gauge {report.kind} exceeds thresholds: {', '.join(exceeded)}")
    else:
        logger.info(f"Gauge {report.kind} certified: max |R f| = {report.max_forward_residual:.3e}")
    return GaugeOutcome(report=report, annihilation=annihilation, field=field, paths=paths)


# Verification

def _guarded(name: str, check: Callable[[], VerifyCheck]) -> VerifyCheck:
    """Run one check; scene and numerical failures become a failed row."""
    try:
        return check()
    except (SceneError, NumericalError, DegenerateDenominator) as exc:
        logger.warning(f"Check {name} failed: {exc}")
        return VerifyCheck(name=name, passed=False, message=f"{type(exc).__name__}: {exc.message}")


def _not_applicable(name: str, why: str) -> VerifyCheck:
    return VerifyCheck(name=name, passed=True, message=f"n/a: {why}")


def _measured(name: str, value: float, threshold: float) -> VerifyCheck:
    return VerifyCheck(name=name, passed=bool(value <= threshold), value=value, threshold=threshold)


class _Nodes:
    """Random (axis1, d, offset) nodes inside the configured grid."""

    def __init__(self, config: RunConfig):
        rng = np.random.default_rng(config.verify.seed)
        count, grid = config.verify.nodes, config.grid
        self.axis1 = rng.uniform(grid.x_min, grid.x_max, count)
        self.d = rng.uniform(0.0, grid.d_max, count)
        self.offsets = rng.choice(np.asarray(_offsets(config), dtype=float), count)

    def __iter__(self):
        return zip(self.axis1.tolist(), self.d.tolist(), self.offsets.tolist())


def _evaluate(scene: Scene, nodes: _Nodes, method: ForwardMethod, config: RunConfig) -> np.ndarray:
    evaluators: Dict[float, Callable[[float, float], float]] = {}
    values = []
    for x, d, c in nodes:
        if c not in evaluators:
            evaluators[c] = forward_evaluator(scene, method, config.quad, offset=c)
        values.append(evaluators[c](x, d))
    return np.array(values)


def _check_agreement(config: RunConfig, nodes: _Nodes) -> VerifyCheck:
    name = "reduced-vs-geometric"
    scene = config.scene
    if isinstance(scene, HyperplaneScene) or scene.mode is not FieldMode.PROFILE:
        return _not_applicable(name, "needs a flat or curve profile-mode scene")
    geometric = _evaluate(scene, nodes, ForwardMethod.GEOMETRIC, config)
    reduced = _evaluate(scene, nodes, ForwardMethod.REDUCED, config)
    if isinstance(scene, CurveScene):
        threshold = CURVE_AGREEMENT_REL * float(np.max(np.abs(reduced)))
    else:
        threshold = AGREEMENT_FACTOR * config.quad.abs_tol
    return _measured(name, float(np.max(np.abs(geometric - reduced))), threshold)


def _check_identities(config: RunConfig, nodes: _Nodes) -> VerifyCheck:
    name = "derivative-identities"
    scene = config.scene
    if scene.mode is not FieldMode.PROFILE:
        return _not_applicable(name, "needs a profile-mode scene")
    if isinstance(scene, HyperplaneScene):
        points = [(*scene.line_point(s, c), d) for s, d, c in nodes]
    else:
        points = [(x, d) for x, d, _ in nodes]
    residuals = derivative_identity_residuals(scene, points, options=config.quad)
    return _measured(name, residuals.max_residual, IDENTITY_TOL)


def _scaled_ast(ast: ExprAST, factor: float) -> ExprAST:
    return ExprAST(float(factor) * ast.root, ast.variables)


def _scaled(scene: Scene, factor: float) -> Scene:
    if scene.mode is FieldMode.FIELD:
        key = "field3d" if isinstance(scene, HyperplaneScene) else "field2d"
        return _with_update(scene, **{key: _scaled_ast(getattr(scene, key), factor)})
    if isinstance(scene, HyperplaneScene):
        return _with_update(scene, profile_nd=_scaled_ast(scene.profile_nd, factor))
    return _with_update(scene, profile=scene.profile.scaled(factor))


def _check_linearity(config: RunConfig, nodes: _Nodes) -> VerifyCheck:
    factor = config.verify.scale
    base = _evaluate(config.scene, nodes, ForwardMethod.AUTO, config)
    scaled = _evaluate(_scaled(config.scene, factor), nodes, ForwardMethod.AUTO, config)
    expected = factor * base
    threshold = AGREEMENT_FACTOR * (config.quad.abs_tol * (1.0 + abs(factor))
                                    + config.quad.rel_tol * float(np.max(np.abs(expected))))
    return _measured("linearity", float(np.max(np.abs(scaled - expected))), threshold)


def _check_round_trip(config: RunConfig) -> VerifyCheck:
    name = "round-trip"
    scene = config.scene
    if scene.mode is not FieldMode.PROFILE:
        return _not_applicable(name, "needs a profile-mode scene")
    config.require_derivative_grid()
    method = _invert_method(scene, "auto")
    axis1, axis2 = config.grid.axis1(), config.grid.axis2()
    offsets = _offsets(config)
    grids = [sweep(scene, axis1, axis2, config.quad, config.method, offset=c) for c in offsets]
    recons = _reconstruct(scene, method, grids, offsets, config.invert.total_integral, config)
    truth = _truth(scene)
    worst = max(float(_errors(recon, truth).max()) for recon in recons.values())
    return _measured(name, worst, ROUND_TRIP_TOL[scene.kind])


def _check_data(config: RunConfig, data: Path) -> List[VerifyCheck]:
    scene = config.scene
    expected = scene_hash(scene)
    grids = [read_datagrid_csv(p) for p in line_paths(data, _offsets(config))]
    stale = [g.scene_hash for g in grids if g.scene_hash != expected]
    checks = [VerifyCheck(name="data-hash", passed=not stale,
                          message=f"data {stale[0]}, config {expected}" if stale else "")]
    name = "data-identities"
    if isinstance(scene, HyperplaneScene) or scene.mode is not FieldMode.PROFILE:
        checks.append(_not_applicable(name, "needs a flat or curve profile-mode scene"))
        return checks

    def identities() -> VerifyCheck:
        grid = grids[0]
        residuals = grid_identity_residuals(scene, grid, config.quad)
        steps = [float(np.diff(axis).max()) for axis in (grid.axis1, grid.axis2) if axis.size > 1]
        h = max(steps, default=0.0)
        return _measured(name, residuals.max_residual, IDENTITY_TOL + GRID_TRUNCATION * h * h)

    checks.append(_guarded(name, identities))
    return checks


def run_verify(config: RunConfig, data: Optional[Path] = None) -> VerifySuite:
    """
    Self-checks on random nodes of the configured grid, plus checks of a data file when given.

    Failures are reported in the suite, not raised.
    """
    nodes = _Nodes(config)
    checks = [
        _guarded("reduced-vs-geometric", lambda: _check_agreement(config, nodes)),
        _guarded("derivative-identities", lambda: _check_identities(config, nodes)),
        _guarded("linearity", lambda: _check_linearity(config, nodes)),
        _guarded("round-trip", lambda: _check_round_trip(config)),
    ]
    if data is not None:
        checks += _check_data(config, Path(data))
    suite = VerifySuite(checks=checks)
    failure = suite.first_failure()
    if failure is None:
        logger.info(f"All {len(checks)} verification checks passed")
    else:
        logger.warning(f"Verification failed at {failure.name}")
    return suite


def run_check(config: RunConfig) -> AssumptionReport:
    """Every assumption verdict for the configured scene."""
    report = validate(config.scene)
    logger.info(f"{config.scene.kind} scene: {len(report.failed())} failing assumption(s)")
    return report
