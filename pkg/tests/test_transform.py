# tests/test_transform.py
"""
Tests for the forward head wave transforms, sweeps and grid files.
"""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

import apps.transform.quadrature as quadrature_module
from apps.core.exceptions import (
    ConfigError,
    InsufficientGrid,
    LegExitsTube,
    NodeEvaluationError,
    NumericalError,
    QuadratureNonConvergence,
    SceneIllFormed,
)
from apps.expr import parse
from apps.scene import Box, FlatScene2D, HyperplaneScene, Profile, induced_flat_scene
from apps.transform import (
    DataGrid,
    ForwardMethod,
    QuadratureOptions,
    composite_gauss_legendre,
    hwt_curve,
    hwt_curve_reduced,
    hwt_fixed_theta,
    hwt_fixed_theta_field,
    hwt_flat2d,
    hwt_flat2d_reduced,
    integrate,
    leg_integrals,
    read_datagrid_csv,
    scene_hash,
    sweep,
    sweep_lines,
    write_datagrid_csv,
    write_table_csv,
)
from apps.transform.io import fnv1a_64
from tests.conftest import ARC_RADIUS, curve_scene, flat_scene

SQRT_PI = math.sqrt(math.pi)


def _clockwise_arc():
    """Arc bending away from the legs, so they leave the tube where f vanishes."""
    return curve_scene(
        (f"{ARC_RADIUS}*sin(t/{ARC_RADIUS})", f"-{ARC_RADIUS}*(1-cos(t/{ARC_RADIUS}))"),
        "2.8",
        "0.5",
        tube_radius=8.0,
    )


class TestQuadrature:
    """Test the adaptive and fixed-order rules"""

    @pytest.mark.unit
    def test_empty_and_reversed_intervals(self):
        """Test a == b and b < a"""
        assert integrate(math.sin, 1.0, 1.0) == 0.0
        assert integrate(lambda t: t, 1.0, 0.0) == pytest.approx(-0.5)

    @pytest.mark.unit
    def test_gaussian_integral(self, quad_options):
        """Test ∫exp(-x²) over a wide interval"""
        value = integrate(lambda t: math.exp(-t * t), -8.0, 8.0, quad_options)
        assert value == pytest.approx(SQRT_PI, abs=1e-10)

    @pytest.mark.unit
    def test_nonconvergence_raises(self, monkeypatch):
        """Test that a subdivision-limit warning becomes an error"""
        def fake_quad(*args, **kwargs):
            return 1.0, 0.5, {"neval": 1071, "last": 50}, "The maximum number of subdivisions (50) has been achieved."

        monkeypatch.setattr(quadrature_module, "quad", fake_quad)
        with pytest.raises(QuadratureNonConvergence) as info:
            integrate(math.sin, 0.0, 1.0, leg="descent")
        assert info.value.details["leg"] == "descent"

    @pytest.mark.unit
    def test_roundoff_accepted(self, monkeypatch):
        """Test that a roundoff warning still returns the value"""
        def fake_quad(*args, **kwargs):
            return 0.25, 1e-15, {"neval": 63, "last": 3}, "The occurrence of roundoff error is detected."

        monkeypatch.setattr(quadrature_module, "quad", fake_quad)
        assert integrate(math.sin, 0.0, 1.0) == 0.25

    @pytest.mark.unit
    def test_composite_gauss_legendre(self):
        """Test the fixed rule on ∫_0^π sin"""
        assert composite_gauss_legendre(np.sin, 0.0, math.pi, 16, 0.25) == pytest.approx(2.0, abs=1e-13)


class TestFlatTransform:
    """Test the flat head wave transform"""

    @pytest.mark.unit
    def test_zero_profile(self):
        """Test that f = 0 transforms to 0"""
        scene = FlatScene2D(u1=parse("-0.5", ["x"]), v1=parse("0.5", ["x"]), profile=Profile.zero((-6.0, 6.0)))
        assert hwt_flat2d_reduced(scene, 0.3, 1.0) == 0.0
        assert hwt_flat2d(scene, 0.3, 1.0) == 0.0

    @pytest.mark.unit
    def test_glide_covers_support(self, quad_options):
        """Test that a glide spanning the support gives ∫f̃"""
        scene = flat_scene("-0.5", "0.5")
        assert hwt_flat2d_reduced(scene, -10.0, 20.0, quad_options) == pytest.approx(1.7724538509, abs=1e-9)
        assert hwt_flat2d(scene, -10.0, 20.0, quad_options) == pytest.approx(1.7724538509, abs=1e-9)

    @pytest.mark.unit
    def test_left_of_support(self, constant_scene, quad_options):
        """Test x <= a, d = 0: only the ascending leg sees f, scaled by 1/v1"""
        total = SQRT_PI * math.erf(6.0)
        assert hwt_flat2d_reduced(constant_scene, -7.0, 0.0, quad_options) == pytest.approx(total / 0.6, rel=1e-8)

    @pytest.mark.unit
    def test_reduced_matches_geometric(self, tanh_scene, quad_options):
        """Test the reduced form against quadrature along the legs"""
        rng = np.random.default_rng(11)
        for x, d in zip(rng.uniform(-3.0, 3.0, 25), rng.uniform(0.0, 3.0, 25)):
            reduced = hwt_flat2d_reduced(tanh_scene, x, d, quad_options)
            geometric = hwt_flat2d(tanh_scene, x, d, quad_options)
            assert reduced == pytest.approx(geometric, abs=1e-8)

    @pytest.mark.unit
    def test_descent_leg_closed_form(self, tanh_scene, quad_options):
        """Test the descending leg equals -(1/u1(x))∫_a^x f̃"""
        x = 0.4
        legs = leg_integrals(tanh_scene, x, 1.0, quad_options)
        head = integrate(tanh_scene.profile, -6.0, x, quad_options)
        assert legs.descent == pytest.approx(-head / tanh_scene.u1(x), rel=1e-8)

    @pytest.mark.unit
    def test_glide_additive(self, tanh_scene, quad_options):
        """Test that gliding over d1 + d2 splits into consecutive glides"""
        whole = leg_integrals(tanh_scene, 0.2, 1.5, quad_options).glide
        first = leg_integrals(tanh_scene, 0.2, 0.5, quad_options).glide
        second = leg_integrals(tanh_scene, 0.7, 1.0, quad_options).glide
        assert whole == pytest.approx(first + second, abs=1e-10)

    @pytest.mark.unit
    def test_negative_d_rejected(self, tanh_scene):
        """Test that d < 0 is ill-formed"""
        with pytest.raises(SceneIllFormed):
            hwt_flat2d_reduced(tanh_scene, 0.0, -0.1)

    @pytest.mark.unit
    def test_field_mode_against_simpson(self, field_scene, quad_options):
        """Test field-mode legs against brute-force Simpson sums"""
        x, d = 0.3, 1.2
        s = math.sqrt(0.75)

        def f(px, py):
            return np.exp(-px**2 - (py - 1.0) ** 2)

        t = np.linspace(0.0, 8.0 / s, 40001)
        descent = simpson(f(x - 0.5 * t, s * t), x=t)
        ascent = simpson(f(x + d + 0.5 * t, s * t), x=t)
        g = np.linspace(0.0, d, 40001)
        glide = simpson(f(x + g, 0.0 * g), x=g)
        assert hwt_flat2d(field_scene, x, d, quad_options) == pytest.approx(descent + glide + ascent, abs=1e-8)

    @pytest.mark.unit
    def test_reduced_needs_profile(self, field_scene):
        """Test that the reduced form refuses field-mode scenes"""
        with pytest.raises(SceneIllFormed):
            hwt_flat2d_reduced(field_scene, 0.0, 1.0)


class TestFixedTheta:
    """Test the hyperplane transform for a fixed direction"""

    @pytest.mark.unit
    def test_matches_flat_slice(self, hyperplane_scene, quad_options):
        """Test that the fixed-θ transform is the flat transform on the slice"""
        flat = flat_scene("-(0.6+0.2*tanh(x))", "0.6-0.2*tanh(x)", "exp(-(x^2+0.09))")
        for s, d in ((-1.0, 0.5), (0.5, 2.0)):
            value = hwt_fixed_theta(hyperplane_scene, (s, 0.3), d, quad_options)
            assert value == pytest.approx(hwt_flat2d_reduced(flat, s, d, quad_options), abs=1e-10)

    @pytest.mark.unit
    def test_field_mode_in_plane(self, field_scene, quad_options):
        """Test that legs in the x2 = 0 plane reproduce the flat field transform"""
        scene = HyperplaneScene(
            lambda_u=parse("-0.5", ["x1", "x2"]),
            lambda_v=parse("0.5", ["x1", "x2"]),
            theta0=(1.0, 0.0),
            field3d=parse("exp(-(x1^2+x2^2+(x3-1)^2))", ["x1", "x2", "x3"]),
            box=Box(lower=(-7.0, -6.0, 0.0), upper=(7.0, 6.0, 8.0)),
        )
        value = hwt_fixed_theta_field(scene, (0.3, 0.0), 1.2, options=quad_options)
        assert value == pytest.approx(hwt_flat2d(field_scene, 0.3, 1.2, quad_options), abs=1e-10)

    @pytest.mark.unit
    def test_theta_must_be_unit(self, quad_options):
        """Test that a non-unit direction is rejected"""
        scene = HyperplaneScene(
            lambda_u=parse("-0.5", ["x1", "x2"]),
            lambda_v=parse("0.5", ["x1", "x2"]),
            theta0=(1.0, 0.0),
            field3d=parse("exp(-(x1^2+x2^2+x3^2))", ["x1", "x2", "x3"]),
            box=Box(lower=(-7.0, -7.0, 0.0), upper=(7.0, 7.0, 7.0)),
        )
        with pytest.raises(SceneIllFormed):
            hwt_fixed_theta_field(scene, (0.0, 0.0), 1.0, theta=(1.0, 1.0), options=quad_options)

    @pytest.mark.unit
    def test_sweep_lines(self, hyperplane_scene, quad_options):
        """Test one grid per offset, sampled along the offset line"""
        grids = sweep_lines(hyperplane_scene, [0.0, 0.5], [-1.0, 0.0, 1.0], [0.0, 0.5], quad_options, threads=1)
        assert set(grids) == {0.0, 0.5}
        expected = hwt_fixed_theta(hyperplane_scene, (1.0, 0.5), 0.5, quad_options)
        assert grids[0.5].values[2, 1] == pytest.approx(expected)


class TestCurveTransform:
    """Test gliding along curves"""

    @pytest.mark.unit
    def test_straight_curve_is_flat(self, line_curve, quad_options):
        """Test that γ = (t, 0) reproduces the flat reduced transform"""
        flat = induced_flat_scene(line_curve)
        for s, d in ((-1.0, 0.0), (0.0, 1.5), (0.8, 0.4)):
            value = hwt_curve_reduced(line_curve, s, d, quad_options)
            assert value == pytest.approx(hwt_flat2d_reduced(flat, s, d, quad_options), abs=1e-10)

    @pytest.mark.unit
    def test_straight_curve_full_matches_reduced(self, line_curve, quad_options):
        """Test tube legs against the reduced form on the straight curve"""
        for s, d in ((-0.5, 0.0), (0.3, 1.0)):
            full = hwt_curve(line_curve, s, d, quad_options)
            assert full == pytest.approx(hwt_curve_reduced(line_curve, s, d, quad_options), abs=1e-7)

    @pytest.mark.unit
    def test_arc_full_close_to_reduced(self, quad_options):
        """Test that weak curvature keeps the full and reduced forms close"""
        scene = _clockwise_arc()
        full, reduced = [], []
        for s in (-1.0, 0.0, 1.0):
            for d in (0.0, 1.0):
                full.append(hwt_curve(scene, s, d, quad_options))
                reduced.append(hwt_curve_reduced(scene, s, d, quad_options))
        full, reduced = np.array(full), np.array(reduced)
        assert np.max(np.abs(full - reduced)) <= 0.1 * np.max(np.abs(reduced))

    @pytest.mark.unit
    def test_leg_leaving_tube_raises(self, quad_options):
        """Test that a thin tube cut through the support is reported"""
        scene = curve_scene(("t", "0"), "2.2", "0.9", tube_radius=1.0)
        with pytest.raises(LegExitsTube):
            hwt_curve(scene, 0.0, 0.5, quad_options)

    @pytest.mark.unit
    def test_arc_reduced_glide(self, arc_curve, quad_options):
        """Test the reduced arc transform uses f̃(γ1) along the glide"""
        s, d = 0.5, 1.0
        legs_free = hwt_curve_reduced(arc_curve, s, d, quad_options)
        head = integrate(arc_curve.profile, -3.0, arc_curve.gamma1(s), quad_options)
        tail = integrate(arc_curve.profile, arc_curve.gamma1(s + d), 3.0, quad_options)
        glide = integrate(lambda t: math.exp(-4.0 * (ARC_RADIUS * math.sin(t / ARC_RADIUS)) ** 2),
                          s, s + d, quad_options)
        expected = -head / arc_curve.u1(s) + glide + tail / arc_curve.v1(s + d)
        assert legs_free == pytest.approx(expected, abs=1e-9)


class TestSweep:
    """Test grid sweeps"""

    @pytest.mark.unit
    def test_single_node(self, tanh_scene, quad_options):
        """Test a 1x1 grid"""
        grid = sweep(tanh_scene, [0.0], [0.0], quad_options, threads=1)
        assert grid.shape == (1, 1)
        assert grid.values[0, 0] == pytest.approx(hwt_flat2d_reduced(tanh_scene, 0.0, 0.0, quad_options))
        assert grid.scene_hash == scene_hash(tanh_scene)
        assert grid.quad_tol == quad_options.abs_tol

    @pytest.mark.unit
    def test_zero_profile_grid(self, quad_options):
        """Test that f = 0 sweeps to zeros"""
        scene = FlatScene2D(u1=parse("-0.5", ["x"]), v1=parse("0.5", ["x"]), profile=Profile.zero((-6.0, 6.0)))
        grid = sweep(scene, np.linspace(-2.0, 2.0, 5), np.linspace(0.0, 1.0, 3), quad_options, threads=2)
        assert np.all(grid.values == 0.0)

    @pytest.mark.unit
    def test_bound(self, tanh_scene, quad_options):
        """Test |R| <= (1/|u1| + 1 + 1/v1)∫|f̃|"""
        grid = sweep(tanh_scene, np.linspace(-3.0, 3.0, 7), np.linspace(0.0, 2.0, 5), quad_options, threads=2)
        assert np.max(np.abs(grid.values)) <= 6.0 * SQRT_PI

    @pytest.mark.unit
    def test_deterministic_across_threads(self, tanh_scene, quad_options):
        """Test that the worker count does not change the grid"""
        axis1, axis2 = np.linspace(-2.0, 2.0, 9), np.linspace(0.0, 2.0, 5)
        serial = sweep(tanh_scene, axis1, axis2, quad_options, threads=1)
        parallel = sweep(tanh_scene, axis1, axis2, quad_options, threads=4)
        assert np.array_equal(serial.values, parallel.values)

    @pytest.mark.unit
    def test_linear_in_profile(self, quad_options):
        """Test R(f + g) = R(f) + R(g)"""
        axis1, axis2 = np.linspace(-2.0, 2.0, 5), np.linspace(0.0, 1.0, 3)
        u1, v1 = "-(0.6+0.2*tanh(x))", "0.6-0.2*tanh(x)"
        f = sweep(flat_scene(u1, v1, "exp(-x^2)"), axis1, axis2, quad_options, threads=1)
        g = sweep(flat_scene(u1, v1, "x*exp(-x^2)"), axis1, axis2, quad_options, threads=1)
        both = sweep(flat_scene(u1, v1, "exp(-x^2)+x*exp(-x^2)"), axis1, axis2, quad_options, threads=1)
        assert np.allclose(both.values, f.values + g.values, atol=1e-8)

    @pytest.mark.unit
    def test_grid_must_start_at_zero(self, tanh_scene):
        """Test that the d grid starts at 0"""
        with pytest.raises(InsufficientGrid):
            sweep(tanh_scene, [0.0, 1.0], [0.5, 1.0])

    @pytest.mark.unit
    def test_grid_must_be_uniform(self, tanh_scene):
        """Test that non-uniform axes are rejected"""
        with pytest.raises(InsufficientGrid):
            sweep(tanh_scene, [0.0, 0.1, 0.5], [0.0, 1.0])

    @pytest.mark.unit
    def test_node_failure_carries_coordinates(self, quad_options):
        """Test that an expression failure names the grid node"""
        scene = flat_scene("-0.3", "0.5*sqrt(x)")
        with pytest.raises(NodeEvaluationError) as info:
            sweep(scene, [-1.0], [0.0], quad_options, threads=1)
        assert info.value.details["x"] == -1.0
        assert info.value.details["d"] == 0.0

    @pytest.mark.unit
    def test_reduced_method_needs_profile(self, field_scene):
        """Test that forcing the reduced form on a field scene fails"""
        with pytest.raises(SceneIllFormed):
            sweep(field_scene, [0.0], [0.0], method=ForwardMethod.REDUCED)


class TestDataGrid:
    """Test grid validation and CSV files"""

    @pytest.mark.unit
    def test_shape_mismatch(self):
        """Test that values must match the axes"""
        with pytest.raises(InsufficientGrid):
            DataGrid(axis1=[0.0, 1.0], axis2=[0.0], values=np.zeros((3, 1)))

    @pytest.mark.unit
    def test_non_finite_value(self):
        """Test that NaN samples are reported with their node"""
        values = np.zeros((2, 2))
        values[1, 0] = np.nan
        with pytest.raises(NumericalError) as info:
            DataGrid(axis1=[0.0, 1.0], axis2=[0.0, 0.5], values=values)
        assert info.value.details["x"] == 1.0

    @pytest.mark.unit
    def test_csv_preserves_grid(self, temp_dir, tanh_scene, quad_options):
        """Test that values survive a write and read exactly"""
        grid = sweep(tanh_scene, np.linspace(-1.0, 1.0, 4), np.linspace(0.0, 0.3, 3), quad_options, threads=1)
        path = write_datagrid_csv(grid, temp_dir / "grid.csv")
        assert path.read_text().startswith(f"# scene_hash={grid.scene_hash}")
        loaded = read_datagrid_csv(path)
        assert np.array_equal(loaded.values, grid.values)
        assert np.array_equal(loaded.axis1, grid.axis1)
        assert loaded.scene_hash == grid.scene_hash
        assert loaded.quad_tol == grid.quad_tol

    @pytest.mark.unit
    def test_csv_rejects_d_major_order(self, temp_dir):
        """Test that rows must run x-major"""
        rows = [[0.0, 0.0, 1.0], [1.0, 0.0, 2.0], [0.0, 1.0, 3.0], [1.0, 1.0, 4.0]]
        path = write_table_csv(temp_dir / "grid.csv", {"scene_hash": "0"}, ["x", "d", "value"], np.array(rows))
        with pytest.raises(ConfigError):
            read_datagrid_csv(path)

    @pytest.mark.unit
    def test_csv_missing_file(self, temp_dir):
        """Test reading a missing file"""
        with pytest.raises(ConfigError):
            read_datagrid_csv(temp_dir / "absent.csv")

    @pytest.mark.unit
    def test_fnv_vectors(self):
        """Test FNV-1a 64 against published vectors"""
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
