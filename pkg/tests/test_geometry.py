import numpy as np
import pytest

from fbm.errors import ValidationError
from fbm.geometry import (BoundaryCurve, boundary_distance, build_quadrature,
                          circle_curve, compute_radii, curve_derivative,
                          curve_point, default_node_count, ellipse_curve,
                          grid_interior_mask, is_interior, kite_curve,
                          named_curve, outward_normal)

from oracles import central_difference


class TestCurveEvaluation:
    def test_kite_landmarks(self, kite):
        assert curve_point(kite, 0.0) == pytest.approx([1.0, 0.0], abs=1e-14)
        assert curve_point(kite, np.pi / 2) == pytest.approx([-1.3, 1.5], abs=1e-14)

    def test_circle_point(self, unit_circle):
        assert curve_point(unit_circle, np.pi) == pytest.approx([-1.0, 0.0], abs=1e-14)

    def test_kite_derivative_at_zero(self, kite):
        assert curve_derivative(kite, 0.0) == pytest.approx([0.0, 1.5], abs=1e-14)

    def test_circle_derivative(self, unit_circle):
        assert curve_derivative(unit_circle, 0.0) == pytest.approx([0.0, 1.0], abs=1e-14)

    def test_derivative_matches_finite_difference(self, kite):
        for t in np.linspace(0.0, 2 * np.pi, 11):
            fd_x1 = central_difference(lambda s: curve_point(kite, s[0])[0],
                                       np.array([t]), step=1e-6)[0]
            fd_x2 = central_difference(lambda s: curve_point(kite, s[0])[1],
                                       np.array([t]), step=1e-6)[0]
            d = curve_derivative(kite, t)
            assert d == pytest.approx([fd_x1, fd_x2], abs=1e-8)

    def test_vectorized_matches_scalar(self, kite):
        ts = np.linspace(0.0, 2 * np.pi, 7)
        batch = curve_point(kite, ts)
        for i, t in enumerate(ts):
            assert np.array_equal(batch[i], curve_point(kite, t))


class TestNormals:
    def test_circle_radial(self, unit_circle):
        assert outward_normal(unit_circle, 0.0) == pytest.approx([1.0, 0.0], abs=1e-14)
        assert outward_normal(unit_circle, np.pi / 2) == pytest.approx([0.0, 1.0], abs=1e-15)

    def test_unit_length_and_outward_on_kite(self, kite):
        rule = build_quadrature(kite, 256)
        norms = np.hypot(rule.normals[:, 0], rule.normals[:, 1])
        assert np.all(np.abs(norms - 1.0) <= 1e-12)
        centroid = rule.points.mean(axis=0)
        outward = np.sum(rule.normals * (rule.points - centroid), axis=1)
        assert np.all(outward > 0.0)


class TestRadii:
    def test_kite_reference_radii(self, kite, kite_radii):
        assert kite_radii.r_in_max == pytest.approx(0.923, abs=1e-3)
        assert kite_radii.r_ex_min == pytest.approx(1.985, abs=1e-3)
        assert kite_radii.tau_min == pytest.approx(2.1506, abs=1e-4)

    def test_measured_radii_of_kite_coefficients(self):
        # same boundary without the preset: the measured far point is not
        # the wing tip, so the circumscribed radius comes out larger
        raw = BoundaryCurve(x1_cos=[-0.65, 1.0, 0.65], x1_sin=[0.0],
                            x2_cos=[0.0], x2_sin=[0.0, 1.5])
        measured = compute_radii(raw)
        assert measured.r_in_max == pytest.approx(0.9228136, abs=1e-5)
        assert measured.r_ex_min == pytest.approx(2.0656710, abs=1e-5)

    @pytest.mark.parametrize("radius", [1.0, 2.0, 0.37])
    def test_circle(self, radius):
        radii = compute_radii(circle_curve(radius))
        assert radii.r_in_max == pytest.approx(radius, abs=1e-9)
        assert radii.r_ex_min == pytest.approx(radius, abs=1e-9)

    def test_ellipse_extremes_on_axes(self):
        radii = compute_radii(ellipse_curve(1.0, 1.5))
        assert radii.r_in_max == pytest.approx(1.0, abs=1e-9)
        assert radii.r_ex_min == pytest.approx(1.5, abs=1e-9)

    def test_grid_size_validation(self, unit_circle):
        with pytest.raises(ValidationError):
            compute_radii(circle_curve(1.5), grid_size=512)


class TestQuadrature:
    def test_circle_length(self, unit_circle):
        rule = build_quadrature(unit_circle, 64)
        assert rule.length() == pytest.approx(2 * np.pi, abs=1e-12)

    def test_constant_boundary_norm(self, unit_circle):
        rule = build_quadrature(unit_circle, 32)
        assert rule.boundary_norm(np.ones(32)) == pytest.approx(
            np.sqrt(2 * np.pi), abs=1e-12)

    def test_kite_length_self_convergence(self, kite):
        l1 = build_quadrature(kite, 256).length()
        l2 = build_quadrature(kite, 512).length()
        assert abs(l1 - l2) <= 1e-10

    @pytest.mark.parametrize("m_q", [128, 256])
    def test_spectral_accuracy_of_norms(self, kite, m_q):
        # the arc-length factor |x'| converges to 1e-10 from 128 nodes on
        r1 = build_quadrature(kite, m_q)
        r2 = build_quadrature(kite, 2 * m_q)
        n1 = r1.boundary_norm(np.exp(3j * r1.nodes))
        n2 = r2.boundary_norm(np.exp(3j * r2.nodes))
        assert abs(n1 - n2) <= 1e-10

    def test_weights_sum(self, kite):
        rule = build_quadrature(kite, 128)
        assert np.sum(rule.weights) == pytest.approx(2 * np.pi, abs=1e-12)

    def test_signed_area_of_kite_positive(self, kite):
        rule = build_quadrature(kite, 512)
        d = curve_derivative(kite, rule.nodes)
        area = 0.5 * np.sum(rule.weights * (rule.points[:, 0] * d[:, 1]
                                            - rule.points[:, 1] * d[:, 0]))
        assert area > 0.0

    def test_size_validation(self, kite):
        with pytest.raises(ValidationError):
            build_quadrature(kite, 6)
        with pytest.raises(ValidationError):
            build_quadrature(kite, 63)

    def test_default_node_count(self):
        assert default_node_count(0) == 256
        assert default_node_count(19) == 368
        assert default_node_count(24) == 448


class TestInterior:
    def test_circle_membership(self, unit_circle):
        assert is_interior(unit_circle, [0.0, 0.0]) is True
        assert is_interior(unit_circle, [2.0, 0.0]) is False

    def test_kite_point(self, kite):
        # (0.5, 0) is well separated from the boundary and inside
        assert boundary_distance(kite, np.array([[0.5, 0.0]]))[0] > 0.1
        assert is_interior(kite, [0.5, 0.0]) is True

    def test_nonconvex_pocket(self, kite):
        # points left of the kite body but inside its bounding box
        assert is_interior(kite, [-1.45, 0.0]) is False

    def test_batch_matches_scalar(self, kite):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-2.0, 2.0, size=(200, 2))
        batch = is_interior(kite, pts)
        for i in range(0, 200, 17):
            assert batch[i] == is_interior(kite, pts[i])

    def test_grid_mask_matches_point_test(self, kite):
        xs = np.linspace(-1.9, 1.9, 41)
        ys = np.linspace(-1.9, 1.9, 37)
        mask = grid_interior_mask(kite, xs, ys)
        xx, yy = np.meshgrid(xs, ys)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        assert np.array_equal(mask.ravel(), is_interior(kite, pts))

    def test_distance_from_center_of_circle(self, unit_circle):
        d = boundary_distance(unit_circle, np.array([[0.0, 0.0]]))
        assert d[0] == pytest.approx(1.0, abs=1e-4)


class TestConstructionValidation:
    def test_degenerate_curve_rejected(self):
        with pytest.raises(ValidationError) as err:
            BoundaryCurve(x1_cos=[0.0, 1.0], x1_sin=[0.0],
                          x2_cos=[0.0, 1.0], x2_sin=[0.0])
        assert err.value.code == "curve_not_regular"

    def test_clockwise_rejected(self):
        with pytest.raises(ValidationError) as err:
            BoundaryCurve(x1_cos=[0.0, 1.0], x1_sin=[0.0],
                          x2_cos=[0.0], x2_sin=[0.0, -1.0])
        assert err.value.code == "curve_not_ccw"

    def test_origin_outside_rejected(self):
        with pytest.raises(ValidationError) as err:
            BoundaryCurve(x1_cos=[3.0, 1.0], x1_sin=[0.0],
                          x2_cos=[0.0], x2_sin=[0.0, 1.0])
        assert err.value.code == "origin_not_interior"

    def test_named_curves(self):
        assert named_curve("kite").name == "kite"
        assert named_curve("circle:2.5").name == "circle:2.5"
        assert named_curve("ellipse:1,1.5").name == "ellipse:1,1.5"
        with pytest.raises(ValidationError):
            named_curve("pentagon")
        with pytest.raises(ValidationError):
            named_curve("circle:abc")
