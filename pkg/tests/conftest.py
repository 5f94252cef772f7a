# tests/conftest.py
"""Pytest configuration and shared fixtures."""

import tempfile
from pathlib import Path
from typing import Generator

import pytest

from apps.expr import parse
from apps.metrics import reset_metrics
from apps.scene import Box, CurveScene, FlatScene2D, HyperplaneScene, Profile
from apps.transform import QuadratureOptions

ARC_RADIUS = 50.0


def profile(source: str = "exp(-x^2)", support=(-6.0, 6.0), total=None) -> Profile:
    return Profile(expr=parse(source, ["x"]), support=support, total_integral=total)


def flat_scene(u1: str, v1: str, source: str = "exp(-x^2)", support=(-6.0, 6.0), domain=(-3.0, 3.0)) -> FlatScene2D:
    return FlatScene2D(
        u1=parse(u1, ["x"]),
        v1=parse(v1, ["x"]),
        profile=profile(source, support),
        domain=domain,
    )


def curve_scene(gamma, u_angle: str, v_angle: str, t_range=(-8.0, 8.0), source: str = "exp(-4*x^2)",
                support=(-3.0, 3.0), tube_radius: float = 4.0, domain=None) -> CurveScene:
    return CurveScene(
        gamma=(parse(gamma[0], ["t"]), parse(gamma[1], ["t"])),
        t_range=t_range,
        u_angle=parse(u_angle, ["t"]),
        v_angle=parse(v_angle, ["t"]),
        profile=profile(source, support),
        tube_radius=tube_radius,
        domain=domain,
    )


@pytest.fixture(autouse=True)
def clean_metrics() -> Generator[None, None, None]:
    """Start every test from an empty metrics registry."""
    reset_metrics()
    yield


@pytest.fixture
def quad_options() -> QuadratureOptions:
    return QuadratureOptions(abs_tol=1e-10, rel_tol=1e-8)


@pytest.fixture
def tanh_scene() -> FlatScene2D:
    """Variable fields u1 = -(0.6 + 0.2 tanh x), v1 = 0.6 - 0.2 tanh x, Gaussian profile."""
    return flat_scene("-(0.6+0.2*tanh(x))", "0.6-0.2*tanh(x)")


@pytest.fixture
def constant_scene() -> FlatScene2D:
    """Constant fields u1 = -0.3, v1 = 0.6, Gaussian profile."""
    return flat_scene("-0.3", "0.6")


@pytest.fixture
def field_scene() -> FlatScene2D:
    """Field mode f(x, y) = exp(-x^2 - (y-1)^2) with constant fields."""
    return FlatScene2D(
        u1=parse("-0.5", ["x"]),
        v1=parse("0.5", ["x"]),
        field2d=parse("exp(-x^2-(y-1)^2)", ["x", "y"]),
        box=Box(lower=(-7.0, 0.0), upper=(7.0, 8.0)),
    )


@pytest.fixture
def hyperplane_scene() -> HyperplaneScene:
    """λ's depending on x1 only, radially symmetric profile."""
    return HyperplaneScene(
        lambda_u=parse("-(0.6+0.2*tanh(x1))", ["x1", "x2"]),
        lambda_v=parse("0.6-0.2*tanh(x1)", ["x1", "x2"]),
        theta0=(1.0, 0.0),
        profile_nd=parse("exp(-(x1^2+x2^2))", ["x1", "x2"]),
        support=Box(lower=(-6.0, -6.0), upper=(6.0, 6.0)),
        domain=Box(lower=(-3.0, -1.0), upper=(3.0, 1.0)),
    )


@pytest.fixture
def hyperplane_xy_scene() -> HyperplaneScene:
    """λ's varying along θ0 and across lines, radially symmetric profile."""
    return HyperplaneScene(
        lambda_u=parse("-(0.6+0.2*tanh(x1)+0.1*tanh(x2))", ["x1", "x2"]),
        lambda_v=parse("0.6-0.2*tanh(x1)+0.1*tanh(x2)", ["x1", "x2"]),
        theta0=(1.0, 0.0),
        profile_nd=parse("exp(-(x1^2+x2^2))", ["x1", "x2"]),
        support=Box(lower=(-6.0, -6.0), upper=(6.0, 6.0)),
        domain=Box(lower=(-3.0, -1.0), upper=(3.0, 1.0)),
    )


@pytest.fixture
def line_curve() -> CurveScene:
    """The x-axis as a curve, constant angles, wide tube."""
    return curve_scene(("t", "0"), "2.2", "0.9", t_range=(-10.0, 10.0), tube_radius=20.0)


@pytest.fixture
def arc_curve() -> CurveScene:
    """Unit-speed circular arc of radius 50 (curvature 0.02)."""
    return curve_scene(
        (f"{ARC_RADIUS}*sin(t/{ARC_RADIUS})", f"{ARC_RADIUS}*(1-cos(t/{ARC_RADIUS}))"),
        "2.8-0.2*tanh(t)",
        "0.9-0.2*tanh(t)",
        domain=(-2.0, 2.0),
    )


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Fixture that provides a temporary output directory."""
    with tempfile.TemporaryDirectory() as directory:
        yield Path(directory)


# Configure pytest markers
def pytest_configure(config):
    """Configure custom pytest markers."""
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "slow: marks tests as slow running")
    config.addinivalue_line("markers", "unit: marks tests as unit tests")


# Skip integration and slow tests by default
def pytest_collection_modifyitems(config, items):
    """Modify test collection to handle markers."""
    skips = []
    if not config.getoption("--runintegration"):
        skips.append(("integration", pytest.mark.skip(reason="need --runintegration option to run")))
    if not config.getoption("--runslow"):
        skips.append(("slow", pytest.mark.skip(reason="need --runslow option to run")))
    for item in items:
        for keyword, marker in skips:
            if keyword in item.keywords:
                item.add_marker(marker)


def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--runintegration",
        action="store_true",
        default=False,
        help="run integration tests"
    )
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run slow acceptance sweeps"
    )
