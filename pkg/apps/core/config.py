# apps/core/config.py
"""
Run configs: flat INI files with [scene], [grid], [quad], [task] and [output]
sections, plus optional [invert], [gauge] and [verify] sections.

Expression values are quoted strings handed to `apps.expr.parse`; numeric lists
are comma separated.
"""

from __future__ import annotations

import configparser
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from apps.core.exceptions import ConfigError
from apps.expr import ExprAST, lift, parse, rename
from apps.scene import Box, CurveScene, ExtendedField, FlatScene2D, HyperplaneScene, Profile
from apps.transform import ForwardMethod, QuadratureOptions
from conf.enhanced_logging import get_logger

logger = get_logger(__name__)

Scene = Union[FlatScene2D, HyperplaneScene, CurveScene]

SECTIONS = ("scene", "grid", "quad", "task", "output", "invert", "gauge", "verify")

SCENE_KEYS = {
    "flat2d": {"kind", "u1", "v1", "profile", "support", "total_integral", "field", "box", "domain",
               "u_ext1", "u_ext2", "v_ext1", "v_ext2"},
    "hyperplane": {"kind", "lambda_u", "lambda_v", "theta0", "profile", "support", "field", "box", "domain"},
    "curve": {"kind", "gamma1", "gamma2", "t_range", "u_angle", "v_angle", "profile", "support",
              "total_integral", "field", "box", "tube_radius", "domain", "u_ext1", "u_ext2", "v_ext1", "v_ext2"},
}


class Task(str, Enum):
    FORWARD = "forward"
    INVERT = "invert"
    GAUGE = "gauge"
    VERIFY = "verify"
    CHECK = "check"


class GaugeKind(str, Enum):
    CONSTANT = "constant"
    GENERAL = "general"
    FIXED_THETA = "fixed-theta"
    DEPTH_NULL = "depth-null"


class GridSpec(BaseModel):
    """Uniform sweep grid; axis1 is x (flat), s along θ0 (hyperplane) or arc length (curve)."""
    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    x_count: int = Field(..., ge=1)
    d_max: float = Field(..., ge=0)
    d_count: int = Field(..., ge=1)
    offsets: Tuple[float, ...] = (0.0,)

    def axis1(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_count)

    def axis2(self) -> np.ndarray:
        return np.linspace(0.0, self.d_max, self.d_count)


class InvertSpec(BaseModel):
    method: str = Field("auto", description="thm21, rmk22-1/2/3, all, partial, thm31, thm41 or auto")
    total_integral: Optional[float] = Field(None, description="∫f̃ (or every line integral on hyperplanes)")
    d0: Optional[float] = Field(None, description="Data row used by the single-row method")


class GaugeSpec(BaseModel):
    kind: GaugeKind
    phi: Optional[str] = Field(None, description="Generating potential")
    h: Optional[str] = Field(None, description="Depth profile h(s) for depth-null")
    recover: bool = Field(True, description="Also rebuild the potentials from the generated field")
    points: int = Field(3, ge=1, description="Lattice points per dimension for residual checks")


class VerifySpec(BaseModel):
    nodes: int = Field(20, ge=1, description="Random nodes per check")
    seed: int = 0
    scale: float = Field(2.0, description="Factor for the linearity check")


class OutputSpec(BaseModel):
    data: Optional[Path] = None
    recon: Optional[Path] = None
    report: Optional[Path] = None
    residuals: Optional[Path] = None


class RunConfig(BaseModel):
    """A parsed run config; `scene_section` keeps the raw strings for diagnostics."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    path: Optional[Path] = None
    scene: Scene
    scene_section: Dict[str, str] = Field(default_factory=dict)
    grid: GridSpec
    quad: QuadratureOptions = Field(default_factory=QuadratureOptions)
    task: Task
    method: ForwardMethod = ForwardMethod.AUTO
    invert: InvertSpec = Field(default_factory=InvertSpec)
    gauge: Optional[GaugeSpec] = None
    verify: VerifySpec = Field(default_factory=VerifySpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    def require_derivative_grid(self) -> None:
        """Inversions difference the data: three x nodes and two d rows at least."""
        if self.grid.x_count < 3:
            raise ConfigError("grid.x_count must be at least 3 when derivatives are taken",
                              key="grid.x_count", value=self.grid.x_count)
        if self.grid.d_count < 2:
            raise ConfigError("grid.d_count must be at least 2 when derivatives are taken",
                              key="grid.d_count", value=self.grid.d_count)


# Value parsing

def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _number(section: str, key: str, text: str) -> float:
    try:
        return float(_unquote(text))
    except ValueError:
        raise ConfigError(f"{section}.{key} is not a number: {text!r}", key=f"{section}.{key}") from None


def _integer(section: str, key: str, text: str) -> int:
    try:
        return int(_unquote(text))
    except ValueError:
        raise ConfigError(f"{section}.{key} is not an integer: {text!r}", key=f"{section}.{key}") from None


def _numbers(section: str, key: str, text: str, count: Optional[Sequence[int]] = None) -> Tuple[float, ...]:
    values = tuple(_number(section, key, part) for part in _unquote(text).split(",") if part.strip())
    if count is not None and len(values) not in count:
        raise ConfigError(f"{section}.{key} needs {' or '.join(map(str, count))} numbers, got {len(values)}",
                          key=f"{section}.{key}")
    return values


def _boolean(section: str, key: str, text: str) -> bool:
    value = _unquote(text).lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key} is not a boolean: {text!r}", key=f"{section}.{key}")


def _box(section: str, key: str, text: str, dim: int) -> Box:
    values = _numbers(section, key, text, (2 * dim,))
    return Box(lower=values[:dim], upper=values[dim:])


def _interval(section: str, key: str, text: str) -> Tuple[float, float]:
    a, b = _numbers(section, key, text, (2,))
    return a, b


def _expr(values: Dict[str, str], key: str, variables: Sequence[str]) -> ExprAST:
    text = values.get(key)
    if text is None:
        raise ConfigError(f"scene.{key} is required", key=f"scene.{key}")
    logger.debug(f"Parsing scene.{key} over {tuple(variables)}")
    return parse(_unquote(text), variables)


def _optional(values: Dict[str, str], key: str, convert: Callable[[str], object]):
    return convert(values[key]) if key in values else None


def _extended_pair(values: Dict[str, str]) -> Tuple[Optional[ExtendedField], Optional[ExtendedField]]:
    keys = ("u_ext1", "u_ext2", "v_ext1", "v_ext2")
    present = [k for k in keys if k in values]
    if not present:
        return None, None
    if len(present) != len(keys):
        missing = sorted(set(keys) - set(present))
        raise ConfigError(f"extended fields need all of {', '.join(keys)}", key=f"scene.{missing[0]}")
    u = ExtendedField(components=(_expr(values, "u_ext1", ("x", "y")), _expr(values, "u_ext2", ("x", "y"))))
    v = ExtendedField(components=(_expr(values, "v_ext1", ("x", "y")), _expr(values, "v_ext2", ("x", "y"))))
    return u, v


def _profile(values: Dict[str, str]) -> Optional[Profile]:
    if "profile" not in values:
        return None
    if "support" not in values:
        raise ConfigError("a profile needs scene.support", key="scene.support")
    return Profile(
        expr=_expr(values, "profile", ("x",)),
        support=_interval("scene", "support", values["support"]),
        total_integral=_optional(values, "total_integral", lambda t: _number("scene", "total_integral", t)),
    )


# Scene builders

def _flat_scene(values: Dict[str, str], field: Optional[ExprAST]) -> FlatScene2D:
    u_ext, v_ext = _extended_pair(values)
    if field is None and "field" in values:
        field = _expr(values, "field", ("x", "y"))
    return FlatScene2D(
        u1=_expr(values, "u1", ("x",)),
        v1=_expr(values, "v1", ("x",)),
        profile=_profile(values),
        field2d=field,
        box=_optional(values, "box", lambda t: _box("scene", "box", t, 2)),
        domain=_optional(values, "domain", lambda t: _interval("scene", "domain", t)),
        u_ext=u_ext,
        v_ext=v_ext,
    )


def _hyperplane_scene(values: Dict[str, str], field: Optional[ExprAST]) -> HyperplaneScene:
    if field is None and "field" in values:
        field = _expr(values, "field", ("x1", "x2", "x3"))
    theta0 = _numbers("scene", "theta0", values.get("theta0", "1, 0"), (2,))
    return HyperplaneScene(
        lambda_u=_expr(values, "lambda_u", ("x1", "x2")),
        lambda_v=_expr(values, "lambda_v", ("x1", "x2")),
        theta0=theta0,
        profile_nd=_expr(values, "profile", ("x1", "x2")) if "profile" in values else None,
        support=_optional(values, "support", lambda t: _box("scene", "support", t, 2)),
        field3d=field,
        box=_optional(values, "box", lambda t: _box("scene", "box", t, 3)),
        domain=_optional(values, "domain", lambda t: _box("scene", "domain", t, 2)),
    )


def _curve_scene(values: Dict[str, str], field: Optional[ExprAST]) -> CurveScene:
    u_ext, v_ext = _extended_pair(values)
    if field is None and "field" in values:
        field = _expr(values, "field", ("x", "y"))
    if "tube_radius" not in values:
        raise ConfigError("scene.tube_radius is required", key="scene.tube_radius")
    if "t_range" not in values:
        raise ConfigError("scene.t_range is required", key="scene.t_range")
    return CurveScene(
        gamma=(_expr(values, "gamma1", ("t",)), _expr(values, "gamma2", ("t",))),
        t_range=_interval("scene", "t_range", values["t_range"]),
        u_angle=_expr(values, "u_angle", ("t",)),
        v_angle=_expr(values, "v_angle", ("t",)),
        profile=_profile(values),
        field2d=field,
        box=_optional(values, "box", lambda t: _box("scene", "box", t, 2)),
        tube_radius=_number("scene", "tube_radius", values["tube_radius"]),
        domain=_optional(values, "domain", lambda t: _interval("scene", "domain", t)),
        u_ext=u_ext,
        v_ext=v_ext,
    )


SCENE_BUILDERS = {
    "flat2d": _flat_scene,
    "hyperplane": _hyperplane_scene,
    "curve": _curve_scene,
}


def _gauge_field(kind: str, gauge: GaugeSpec) -> ExprAST:
    """The field a gauge config's scene carries: φ itself, or h lifted to a function of depth."""
    variables = ("x1", "x2", "x3") if kind == "hyperplane" else ("x", "y")
    if gauge.kind is GaugeKind.DEPTH_NULL:
        if kind != "hyperplane":
            raise ConfigError("depth-null gauges need a hyperplane scene", key="gauge.kind")
        if gauge.h is None:
            raise ConfigError("gauge.h is required for depth-null", key="gauge.h")
        return lift(rename(parse(gauge.h, ("s",)), {"s": "x3"}), variables)
    if gauge.phi is None:
        raise ConfigError(f"gauge.phi is required for {gauge.kind.value}", key="gauge.phi")
    expected = {
        GaugeKind.CONSTANT: ("flat2d",),
        GaugeKind.GENERAL: ("flat2d", "curve"),
        GaugeKind.FIXED_THETA: ("hyperplane",),
    }[gauge.kind]
    if kind not in expected:
        raise ConfigError(f"{gauge.kind.value} gauges need a {' or '.join(expected)} scene", key="gauge.kind")
    return parse(gauge.phi, variables)


def build_scene(values: Dict[str, str], gauge: Optional[GaugeSpec] = None) -> Scene:
    """
    Build a validated scene model from the raw [scene] section.

    In gauge configs the scene's field is the generating potential from [gauge].

    Raises:
        ConfigError: missing or unknown keys, malformed numbers
        ExprError: an expression does not parse
        SceneIllFormed: the model rejects the combination of values
    """
    kind = _unquote(values.get("kind", ""))
    if kind not in SCENE_BUILDERS:
        raise ConfigError(f"scene.kind must be one of {', '.join(SCENE_BUILDERS)}, got {kind!r}", key="scene.kind")
    unknown = sorted(set(values) - SCENE_KEYS[kind])
    if unknown:
        raise ConfigError(f"unknown key scene.{unknown[0]} for {kind} scenes", key=f"scene.{unknown[0]}")
    field = None
    if gauge is not None:
        if "field" in values or "profile" in values:
            raise ConfigError("gauge configs take the scene field from [gauge]", key="scene.field")
        field = _gauge_field(kind, gauge)
    return SCENE_BUILDERS[kind](values, field)


# Sections

def _section(parser: configparser.ConfigParser, name: str) -> Dict[str, str]:
    return dict(parser.items(name)) if parser.has_section(name) else {}


def _grid(values: Dict[str, str]) -> GridSpec:
    required = ("x_min", "x_max", "x_count", "d_max", "d_count")
    for key in required:
        if key not in values:
            raise ConfigError(f"grid.{key} is required", key=f"grid.{key}")
    unknown = sorted(set(values) - set(required) - {"d_min", "offsets"})
    if unknown:
        raise ConfigError(f"unknown key grid.{unknown[0]}", key=f"grid.{unknown[0]}")
    if "d_min" in values and _number("grid", "d_min", values["d_min"]) != 0.0:
        raise ConfigError("grid.d_min must be 0: the d axis starts on the gliding set", key="grid.d_min")
    x_count = _integer("grid", "x_count", values["x_count"])
    d_count = _integer("grid", "d_count", values["d_count"])
    if x_count < 1 or d_count < 1:
        raise ConfigError("the grid is empty", key="grid.x_count" if x_count < 1 else "grid.d_count")
    x_min, x_max = _number("grid", "x_min", values["x_min"]), _number("grid", "x_max", values["x_max"])
    if x_count > 1 and not x_min < x_max:
        raise ConfigError("grid.x_min must be below grid.x_max", key="grid.x_min")
    d_max = _number("grid", "d_max", values["d_max"])
    if d_max < 0.0 or (d_count > 1 and d_max == 0.0):
        raise ConfigError("grid.d_max must be positive when d_count > 1", key="grid.d_max")
    offsets = _numbers("grid", "offsets", values["offsets"]) if "offsets" in values else (0.0,)
    if not offsets:
        raise ConfigError("grid.offsets lists no lines", key="grid.offsets")
    return GridSpec(x_min=x_min, x_max=x_max, x_count=x_count, d_max=d_max, d_count=d_count, offsets=offsets)


def _quad(values: Dict[str, str]) -> QuadratureOptions:
    known = {"abs_tol": _number, "rel_tol": _number, "limit": _integer}
    overrides = {}
    for key, text in values.items():
        if key not in known:
            raise ConfigError(f"unknown key quad.{key}", key=f"quad.{key}")
        overrides[key] = known[key]("quad", key, text)
    for key in ("abs_tol", "rel_tol"):
        if key in overrides and not overrides[key] > 0.0:
            raise ConfigError(f"quad.{key} must be positive", key=f"quad.{key}")
    if "limit" in overrides and overrides["limit"] < 50:
        raise ConfigError("quad.limit must be at least 50", key="quad.limit")
    return QuadratureOptions(**overrides)


def _enum(section: str, key: str, text: str, enum):
    value = _unquote(text)
    try:
        return enum(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum)
        raise ConfigError(f"{section}.{key} must be one of {choices}, got {value!r}", key=f"{section}.{key}") from None


def _invert(values: Dict[str, str]) -> InvertSpec:
    unknown = sorted(set(values) - {"method", "total_integral", "d0"})
    if unknown:
        raise ConfigError(f"unknown key invert.{unknown[0]}", key=f"invert.{unknown[0]}")
    return InvertSpec(
        method=_unquote(values.get("method", "auto")),
        total_integral=_optional(values, "total_integral", lambda t: _number("invert", "total_integral", t)),
        d0=_optional(values, "d0", lambda t: _number("invert", "d0", t)),
    )


def _gauge(values: Dict[str, str]) -> Optional[GaugeSpec]:
    if not values:
        return None
    if "kind" not in values:
        raise ConfigError("gauge.kind is required", key="gauge.kind")
    unknown = sorted(set(values) - {"kind", "phi", "h", "recover", "points"})
    if unknown:
        raise ConfigError(f"unknown key gauge.{unknown[0]}", key=f"gauge.{unknown[0]}")
    points = _integer("gauge", "points", values["points"]) if "points" in values else 3
    if points < 1:
        raise ConfigError("gauge.points must be positive", key="gauge.points")
    return GaugeSpec(
        kind=_enum("gauge", "kind", values["kind"], GaugeKind),
        phi=_optional(values, "phi", _unquote),
        h=_optional(values, "h", _unquote),
        recover=_boolean("gauge", "recover", values["recover"]) if "recover" in values else True,
        points=points,
    )


def _verify(values: Dict[str, str]) -> VerifySpec:
    unknown = sorted(set(values) - {"nodes", "seed", "scale"})
    if unknown:
        raise ConfigError(f"unknown key verify.{unknown[0]}", key=f"verify.{unknown[0]}")
    nodes = _integer("verify", "nodes", values["nodes"]) if "nodes" in values else 20
    if nodes < 1:
        raise ConfigError("verify.nodes must be positive", key="verify.nodes")
    return VerifySpec(
        nodes=nodes,
        seed=_integer("verify", "seed", values["seed"]) if "seed" in values else 0,
        scale=_number("verify", "scale", values["scale"]) if "scale" in values else 2.0,
    )


def _output(values: Dict[str, str], base: Path) -> OutputSpec:
    unknown = sorted(set(values) - {"data", "recon", "report", "residuals"})
    if unknown:
        raise ConfigError(f"unknown key output.{unknown[0]}", key=f"output.{unknown[0]}")
    return OutputSpec(**{key: base / _unquote(text) for key, text in values.items()})


def parse_run_config(text: str, path: Optional[Path] = None) -> RunConfig:
    """
    Parse run-config text.

    Relative output paths resolve against the config file's directory.

    Raises:
        ConfigError: malformed INI, missing sections or keys, bad values
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc.message}") from None
    unknown = [name for name in parser.sections() if name not in SECTIONS]
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}]", key=unknown[0])
    for name in ("scene", "grid"):
        if not parser.has_section(name):
            raise ConfigError(f"missing section [{name}]", key=name)

    task_values = _section(parser, "task")
    unknown = sorted(set(task_values) - {"task", "method"})
    if unknown:
        raise ConfigError(f"unknown key task.{unknown[0]}", key=f"task.{unknown[0]}")
    tasks = [t.strip() for t in _unquote(task_values.get("task", "forward")).split(",") if t.strip()]
    if len(tasks) != 1:
        raise ConfigError("task.task must name exactly one task", key="task.task")

    gauge = _gauge(_section(parser, "gauge"))
    scene_values = _section(parser, "scene")
    config = RunConfig(
        path=path,
        scene=build_scene(scene_values, gauge),
        scene_section=scene_values,
        grid=_grid(_section(parser, "grid")),
        quad=_quad(_section(parser, "quad")),
        task=_enum("task", "task", tasks[0], Task),
        method=_enum("task", "method", task_values.get("method", "auto"), ForwardMethod),
        invert=_invert(_section(parser, "invert")),
        gauge=gauge,
        verify=_verify(_section(parser, "verify")),
        output=_output(_section(parser, "output"), path.parent if path else Path(".")),
    )
    logger.info(f"Loaded {config.scene.kind} config for task {config.task.value}")
    return config


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", key="config", path=str(path))
    return parse_run_config(path.read_text(encoding="utf-8"), path)


def suffixed(path: Path, tag: str) -> Path:
    """`out/data.csv` -> `out/data.<tag>.csv`."""
    return path.with_name(f"{path.stem}.{tag}{path.suffix}")


def line_paths(path: Path, offsets: Sequence[float]) -> List[Path]:
    """One data file per hyperplane line; a single line keeps the plain path."""
    if len(offsets) == 1:
        return [path]
    return [suffixed(path, f"line{k}") for k in range(len(offsets))]
