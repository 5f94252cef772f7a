# tests/test_scene.py
"""
Tests for scene models, curve geometry and assumption validation.
"""

import math

import numpy as np
import pytest

from apps.core.exceptions import DomainError, LatticeTooCoarse, OutsideTube, SceneIllFormed
from apps.expr import parse
from apps.scene import (
    Box,
    CurveScene,
    ExtendedField,
    FlatScene2D,
    HyperplaneScene,
    Profile,
    Verdict,
    clip_ray,
    clip_segment,
    induced_flat_scene,
    nearest_point_frame,
    validate,
)
from apps.transform import scene_hash
from tests.conftest import ARC_RADIUS, curve_scene, flat_scene, profile


def _hyperplane(scene: HyperplaneScene, theta) -> HyperplaneScene:
    return HyperplaneScene(
        lambda_u=scene.lambda_u,
        lambda_v=scene.lambda_v,
        theta0=theta,
        profile_nd=scene.profile_nd,
        support=scene.support,
        domain=scene.domain,
    )


class TestBox:
    """Test support boxes and ray clipping"""

    @pytest.mark.unit
    def test_rejects_inverted_corners(self):
        """Test that a lower corner above the upper corner is rejected"""
        with pytest.raises(SceneIllFormed):
            Box(lower=(1.0, 0.0), upper=(0.0, 1.0))

    @pytest.mark.unit
    def test_contains_and_widths(self):
        """Test membership and widths"""
        box = Box(lower=(0.0, -1.0), upper=(2.0, 1.0))
        assert box.dim == 2
        assert box.widths() == (2.0, 2.0)
        assert box.contains((1.0, 0.5))
        assert not box.contains((2.5, 0.0))

    @pytest.mark.unit
    def test_clip_ray_through_box(self):
        """Test that a horizontal line enters and leaves the unit square"""
        box = Box(lower=(0.0, 0.0), upper=(1.0, 1.0))
        assert clip_ray(box, (-1.0, 0.5), (1.0, 0.0)) == pytest.approx((1.0, 2.0))

    @pytest.mark.unit
    def test_clip_ray_misses(self):
        """Test that a line passing above the box returns None"""
        box = Box(lower=(0.0, 0.0), upper=(1.0, 1.0))
        assert clip_ray(box, (-1.0, 2.0), (1.0, 0.0)) is None

    @pytest.mark.unit
    def test_clip_segment_on_half_strip(self):
        """Test clipping a descending leg against the strip over the support"""
        box = Box(lower=(-6.0, 0.0), upper=(6.0, math.inf))
        span = clip_segment(box, (0.0, 0.0), (-0.6, 0.8))
        assert span == pytest.approx((0.0, 10.0))


class TestProfile:
    """Test profile support handling"""

    @pytest.mark.unit
    def test_nonvanishing_edges_rejected(self):
        """Test that a profile large at its support edge is rejected"""
        with pytest.raises(SceneIllFormed):
            profile("exp(-x^2)", support=(-1.0, 1.0))

    @pytest.mark.unit
    def test_zero_outside_support(self):
        """Test that the profile is zero off its support"""
        p = profile()
        assert p(7.0) == 0.0
        assert p(0.0) == 1.0
        assert p.peak == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.unit
    def test_peak_between_lattice_nodes(self):
        """Test that the peak is found when no lattice node sits on the maximum"""
        p = profile("3*exp(-(x-0.3)^2)", support=(-6.0, 6.0))
        assert p.peak == pytest.approx(3.0, abs=1e-12)
        assert Profile.zero().peak == 0.0

    @pytest.mark.unit
    def test_scaled(self):
        """Test scaling multiplies values"""
        p = profile().scaled(3.0)
        assert p(0.5) == pytest.approx(3.0 * math.exp(-0.25))

    @pytest.mark.unit
    def test_two_variable_profile_rejected(self):
        """Test that the profile must be one-variable"""
        with pytest.raises(SceneIllFormed):
            Profile(expr=parse("x*y", ["x", "y"]), support=(-1.0, 1.0))


class TestFlatScene:
    """Test flat scene construction"""

    @pytest.mark.unit
    def test_profile_and_field_exclusive(self):
        """Test that giving both profile and field is rejected"""
        with pytest.raises(SceneIllFormed):
            FlatScene2D(
                u1=parse("-0.5", ["x"]),
                v1=parse("0.5", ["x"]),
                profile=profile(),
                field2d=parse("x*y", ["x", "y"]),
                box=Box(lower=(0.0, 0.0), upper=(1.0, 1.0)),
            )

    @pytest.mark.unit
    def test_leg_directions_are_unit(self, tanh_scene):
        """Test that u and v are unit vectors pointing into y > 0"""
        u, v = tanh_scene.leg_directions(0.4, 1.0)
        assert np.hypot(*u) == pytest.approx(1.0)
        assert np.hypot(*v) == pytest.approx(1.0)
        assert u[0] < 0.0 < u[1]
        assert v[0] > 0.0 and v[1] > 0.0

    @pytest.mark.unit
    def test_first_component_out_of_range(self):
        """Test that |u1| >= 1 fails when the direction is formed"""
        scene = flat_scene("-1.5", "0.5")
        with pytest.raises(DomainError):
            scene.u_vector(0.0)

    @pytest.mark.unit
    def test_fingerprint_stable(self, tanh_scene):
        """Test that equal scenes hash equally and different ones do not"""
        same = flat_scene("-(0.6+0.2*tanh(x))", "0.6-0.2*tanh(x)")
        other = flat_scene("-(0.6+0.2*tanh(x))", "0.6-0.1*tanh(x)")
        assert scene_hash(tanh_scene) == scene_hash(same)
        assert scene_hash(tanh_scene) != scene_hash(other)
        assert len(scene_hash(tanh_scene)) == 16


class TestValidate:
    """Test assumption checks on lattices"""

    @pytest.mark.unit
    def test_variable_fields_hold(self, tanh_scene):
        """Test that the tanh scene satisfies every flat assumption"""
        report = validate(tanh_scene)
        assert report.holds
        assert report.get("A1.sign").status is Verdict.HOLDS
        assert report.get("A1.nondegeneracy").worst_margin > 0.0
        assert report.get("B1.straight").status is Verdict.NOT_APPLICABLE

    @pytest.mark.unit
    def test_constant_fields_degenerate(self, constant_scene):
        """Test that constant u1 and v1 fail the nondegeneracy condition"""
        report = validate(constant_scene)
        assert report.get("A1.sign").status is Verdict.HOLDS
        assert report.get("A1.nondegeneracy").status is Verdict.FAILS
        assert not report.holds

    @pytest.mark.unit
    def test_sign_failure_lists_points(self):
        """Test that v1 > 1 fails the sign check with failing points"""
        report = validate(flat_scene("-0.5", "1.2"))
        verdict = report.get("A1.sign")
        assert verdict.status is Verdict.FAILS
        assert verdict.failures
        assert verdict.worst_margin < 0.0
        assert "A1.sign" in report.to_text()

    @pytest.mark.unit
    def test_coarse_lattice_rejected(self, tanh_scene):
        """Test that lattices under 256 points are refused"""
        with pytest.raises(LatticeTooCoarse):
            validate(tanh_scene, lattice=100)

    @pytest.mark.unit
    def test_deterministic(self, tanh_scene):
        """Test that validation is repeatable"""
        assert validate(tanh_scene) == validate(tanh_scene)

    @pytest.mark.unit
    def test_constant_extensions_hold(self, field_scene):
        """Test that constant extensions are straight and independent"""
        s = math.sqrt(0.75)
        scene = field_scene.model_copy(update={
            "u_ext": ExtendedField.constant((-0.5, s)),
            "v_ext": ExtendedField.constant((0.5, s)),
        })
        report = validate(scene)
        assert report.get("B1.straight").status is Verdict.HOLDS
        assert report.get("B2.independent").status is Verdict.HOLDS
        assert report.get("B1.trace").status is Verdict.HOLDS

    @pytest.mark.unit
    def test_rotating_extension_bends(self, field_scene):
        """Test that w = (cos y, sin y) has curved integral curves"""
        rotating = ExtendedField(components=(parse("cos(y)", ["x", "y"]), parse("sin(y)", ["x", "y"])))
        scene = field_scene.model_copy(update={
            "u_ext": rotating,
            "v_ext": ExtendedField.constant((0.5, math.sqrt(0.75))),
        })
        assert validate(scene).get("B1.straight").status is Verdict.FAILS

    @pytest.mark.unit
    def test_field_mode_skips_profile_checks(self, field_scene):
        """Test that nondegeneracy is not applicable in field mode"""
        report = validate(field_scene)
        assert report.get("A1.nondegeneracy").status is Verdict.NOT_APPLICABLE
        assert report.holds

    @pytest.mark.unit
    def test_hyperplane_holds(self, hyperplane_scene):
        """Test the hyperplane assumptions on the tanh λ scene"""
        report = validate(hyperplane_scene, lattice=256)
        assert report.get("A2.sign").status is Verdict.HOLDS
        assert report.get("A2.nondegeneracy").status is Verdict.HOLDS
        assert report.get("B3.constant").status is Verdict.NOT_APPLICABLE

    @pytest.mark.unit
    def test_line_curve_degenerate(self, line_curve):
        """Test that constant angles along a straight curve are degenerate"""
        report = validate(line_curve)
        assert report.get("A3.sign").status is Verdict.HOLDS
        assert report.get("A3.unit_speed").status is Verdict.HOLDS
        assert report.get("A3.nondegeneracy").status is Verdict.FAILS
        assert report.get("A3.simple").status is Verdict.HOLDS

    @pytest.mark.unit
    def test_arc_curve_holds(self, arc_curve):
        """Test that the arc scene satisfies the curve assumptions"""
        report = validate(arc_curve)
        assert report.holds, report.to_text()

    @pytest.mark.unit
    def test_curve_sign_failure(self):
        """Test that u pointing forward along the curve fails the sign check"""
        scene = curve_scene(("t", "0"), "1.0", "0.9")
        assert validate(scene).get("A3.sign").status is Verdict.FAILS


class TestHyperplaneSlices:
    """Test induced flat scenes on lines of the hyperplane"""

    @pytest.mark.unit
    def test_theta_must_be_unit(self, hyperplane_scene):
        """Test that a non-unit θ0 is rejected"""
        with pytest.raises(SceneIllFormed):
            _hyperplane(hyperplane_scene, (1.0, 0.1))

    @pytest.mark.unit
    def test_slice_restricts_fields(self, hyperplane_scene):
        """Test that the slice at offset c carries λ(s, c) and f̃(s, c)"""
        flat = hyperplane_scene.slice_scene(0.5)
        for s in (-2.0, 0.0, 1.3):
            assert flat.u1(s) == pytest.approx(-(0.6 + 0.2 * math.tanh(s)))
            assert flat.profile(s) == pytest.approx(math.exp(-(s * s + 0.25)))
        assert flat.profile.support == pytest.approx((-6.0, 6.0))

    @pytest.mark.unit
    def test_slice_is_cached(self, hyperplane_scene):
        """Test that slices are computed once per offset"""
        assert hyperplane_scene.slice_scene(0.5) is hyperplane_scene.slice_scene(0.5)

    @pytest.mark.unit
    def test_slice_off_support_is_zero(self, hyperplane_scene):
        """Test that a line missing the support box has a zero profile"""
        flat = hyperplane_scene.slice_scene(7.0)
        assert flat.profile(0.0) == 0.0
        assert flat.profile.total_integral == 0.0

    @pytest.mark.unit
    def test_rotated_direction(self, hyperplane_scene):
        """Test slicing along θ0 = (0.6, 0.8)"""
        scene = _hyperplane(hyperplane_scene, (0.6, 0.8))
        c = 0.4
        flat = scene.slice_scene(c)
        for s in (-1.0, 0.5, 2.0):
            x1 = 0.6 * s - 0.8 * c
            assert flat.u1(s) == pytest.approx(-(0.6 + 0.2 * math.tanh(x1)))
        point = scene.line_point(1.5, c)
        assert scene.line_coordinates(point) == pytest.approx((1.5, c))


class TestCurveGeometry:
    """Test arc length, projection and frames"""

    @pytest.mark.unit
    def test_arc_is_unit_speed(self, arc_curve):
        """Test that the arc parameter is arc length"""
        for t in np.linspace(-7.5, 7.5, 7):
            assert arc_curve.arc_length(t) == pytest.approx(t, abs=1e-9)
            assert arc_curve.parameter_at(t) == pytest.approx(t, abs=1e-9)

    @pytest.mark.unit
    def test_non_unit_speed_line(self):
        """Test reparameterization of γ(t) = (2t, 0)"""
        scene = curve_scene(("2*t", "0"), "2.2", "0.9", t_range=(0.0, 5.0))
        assert scene.s_range == pytest.approx((0.0, 10.0))
        assert scene.arc_length(3.0) == pytest.approx(6.0, abs=1e-12)
        assert scene.parameter_at(6.0) == pytest.approx(3.0, abs=1e-12)
        assert scene.position(6.0) == pytest.approx([6.0, 0.0])

    @pytest.mark.unit
    def test_parameter_outside_range(self, arc_curve):
        """Test that arc lengths past the ends are rejected"""
        with pytest.raises(OutsideTube):
            arc_curve.parameter_at(9.0)

    @pytest.mark.unit
    def test_line_frame(self, line_curve):
        """Test that the x-axis frame is the standard basis"""
        s, e, e_perp = nearest_point_frame(line_curve, (2.0, 0.1))
        assert s == pytest.approx(2.0)
        assert e == pytest.approx([1.0, 0.0])
        assert e_perp == pytest.approx([0.0, 1.0])
        assert line_curve.u(2.0) == pytest.approx([math.cos(2.2), math.sin(2.2)])

    @pytest.mark.unit
    def test_on_curve_point_projects_to_itself(self, arc_curve):
        """Test that curve points are their own nearest points"""
        point = arc_curve.position(1.3)
        s, _, _ = nearest_point_frame(arc_curve, point)
        assert s == pytest.approx(1.3, abs=1e-9)

    @pytest.mark.unit
    def test_projection_matches_dense_scan(self, arc_curve):
        """Test projections of random tube points against a brute-force scan"""
        rng = np.random.default_rng(7)
        ts = np.linspace(-8.0, 8.0, 40001)
        xs = ARC_RADIUS * np.sin(ts / ARC_RADIUS)
        ys = ARC_RADIUS * (1.0 - np.cos(ts / ARC_RADIUS))
        geometry = arc_curve.geometry
        for _ in range(20):
            t = rng.uniform(-5.0, 5.0)
            offset = rng.uniform(-3.5, 3.5)
            p = arc_curve.position(t) + offset * arc_curve.normal(t)
            t_star, distance = geometry.project(p, arc_curve.tube_radius)
            assert t_star == pytest.approx(t, abs=1e-8)
            assert distance <= np.min(np.hypot(xs - p[0], ys - p[1])) + 1e-9

    @pytest.mark.unit
    def test_outside_tube(self, arc_curve):
        """Test points far from the curve or beyond its ends"""
        with pytest.raises(OutsideTube):
            nearest_point_frame(arc_curve, (0.0, 10.0))
        with pytest.raises(OutsideTube):
            nearest_point_frame(arc_curve, (20.0, 0.0))

    @pytest.mark.unit
    def test_gamma1_on_arc(self, arc_curve):
        """Test γ1 = γ·γ' on the circular arc"""
        for s in (-3.0, 0.0, 2.5):
            assert arc_curve.gamma1(s) == pytest.approx(ARC_RADIUS * math.sin(s / ARC_RADIUS))

    @pytest.mark.unit
    def test_profile_field_constant_along_normals(self, arc_curve):
        """Test that f(p) = f̃(p·e) is constant along normal segments"""
        s = 0.7
        base = arc_curve.position(s)
        normal = arc_curve.normal(s)
        expected = math.exp(-4.0 * arc_curve.gamma1(s) ** 2)
        for r in (-2.0, 0.0, 1.5):
            assert arc_curve.field_value(*(base + r * normal)) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.unit
    def test_zero_speed_rejected(self):
        """Test that a stationary parameterization is rejected"""
        with pytest.raises(SceneIllFormed):
            curve_scene(("t^2", "0"), "2.2", "0.9", t_range=(0.0, 1.0)).geometry


class TestInducedFlatScene:
    """Test reduction of a straight curve to a flat scene"""

    @pytest.mark.unit
    def test_line_reduces(self, line_curve):
        """Test that angles become first components"""
        flat = induced_flat_scene(line_curve)
        assert isinstance(flat, FlatScene2D)
        assert flat.u1(0.3) == pytest.approx(math.cos(2.2))
        assert flat.v1(-1.0) == pytest.approx(math.cos(0.9))
        assert flat.profile is line_curve.profile

    @pytest.mark.unit
    def test_arc_does_not_reduce(self, arc_curve):
        """Test that a bent curve has no induced flat scene"""
        with pytest.raises(SceneIllFormed):
            induced_flat_scene(arc_curve)

    @pytest.mark.unit
    def test_curve_scene_type(self, line_curve):
        """Test the scene kind tag"""
        assert isinstance(line_curve, CurveScene)
        assert line_curve.kind == "curve"
