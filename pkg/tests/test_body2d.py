import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from setflow import body2d
from setflow.body2d import (
    Body2D,
    Interval1D,
    LinearOp2,
    apply_op,
    convex_hull,
    disk,
    fourier_coefficients,
    fourier_projection,
    from_fourier,
    from_json,
    from_polygon,
    minkowski_combination,
    minkowski_sum,
    scale_translate,
    to_json,
    unit,
)
from setflow.errors import (
    DegenerateInput,
    GridMismatch,
    InvalidInput,
    NonConvexInput,
    NonPositiveScale,
    SingularOperator,
)
from setflow.lab import random_polygon

from .conftest import angles, bodies

TH = np.linspace(0, 2 * np.pi, 97)


class TestLinearOp2:
    def test_rotation_matrix(self):
        A = LinearOp2.rotation(np.pi / 2)
        np.testing.assert_allclose(A.entries, [[0, -1], [1, 0]], atol=1e-15)
        assert A.kind == "rotation"

    def test_reflection_is_involution(self):
        F = LinearOp2.reflection(0.3)
        np.testing.assert_allclose((F @ F).entries, np.eye(2), atol=1e-15)
        assert F.period() == 2
        assert F.det == pytest.approx(-1)

    @given(angles)
    def test_from_matrix_recognises_rotation(self, a):
        B = LinearOp2.from_matrix(LinearOp2.rotation(a).entries)
        assert B.kind == "rotation"
        assert np.cos(B.angle) == pytest.approx(np.cos(a), abs=1e-12)
        assert np.sin(B.angle) == pytest.approx(np.sin(a), abs=1e-12)

    @given(angles)
    def test_from_matrix_recognises_reflection(self, phi):
        B = LinearOp2.from_matrix(LinearOp2.reflection(phi).entries)
        assert B.kind == "reflection"
        np.testing.assert_allclose(LinearOp2.reflection(B.angle).entries, B.entries, atol=1e-12)

    def test_general(self):
        B = LinearOp2.from_matrix([[2, 0], [0, 1]])
        assert B.kind == "general" and not B.is_orthogonal()
        np.testing.assert_allclose((B @ B.inverse()).entries, np.eye(2))

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 7, 12])
    def test_period(self, m):
        assert LinearOp2.rotation_order(m).period() == m

    def test_irrational_has_no_period(self):
        assert LinearOp2.rotation(1.0).period() is None

    def test_power_matches_matrix_power(self):
        A = LinearOp2.from_matrix([[0.5, -1.5], [0.5, 0.5]])
        np.testing.assert_allclose(A.power(3).entries, np.linalg.matrix_power(A.entries, 3))
        np.testing.assert_allclose(A.power(-1).entries, np.linalg.inv(A.entries))

    @pytest.mark.parametrize(
        "op",
        [LinearOp2.rotation(0.4), LinearOp2.reflection(1.1), LinearOp2.from_matrix([[1, 2], [0, 1]])],
    )
    def test_json_roundtrip(self, op):
        back = LinearOp2.from_json(json.loads(json.dumps(op.to_json())))
        np.testing.assert_allclose(back.entries, op.entries)
        assert back.kind == op.kind

    def test_json_order(self):
        np.testing.assert_allclose(
            LinearOp2.from_json({"kind": "rotation", "m": 6}).entries,
            LinearOp2.rotation(np.pi / 3).entries,
        )

    def test_unknown_kind(self):
        with pytest.raises(InvalidInput):
            LinearOp2.from_json({"kind": "shear"})


class TestPolygon:
    def test_hull_drops_interior_and_collinear(self):
        pts = [[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]]
        hull = convex_hull(pts)
        assert len(hull) == 4
        assert body2d.polygon_area(hull) == pytest.approx(1.0)

    def test_hull_is_counterclockwise(self, rng):
        hull = convex_hull(rng.normal(size=(50, 2)))
        assert body2d.polygon_area(hull) > 0

    def test_square_support(self, square):
        np.testing.assert_allclose(
            square.support(TH), np.maximum.reduce([np.zeros_like(TH), np.cos(TH), np.sin(TH), np.cos(TH) + np.sin(TH)])
        )

    def test_collinear_rejected(self):
        with pytest.raises(NonConvexInput):
            from_polygon([[0, 0], [1, 0], [2, 0]])

    def test_reflex_vertex_rejected(self):
        with pytest.raises(NonConvexInput):
            from_polygon([[0, 0], [2, 0], [1, 0.2], [2, 2], [0, 2]])

    def test_too_few_points(self):
        with pytest.raises(DegenerateInput):
            from_polygon([[0, 0], [1, 0]])

    def test_edges_of_square(self, square):
        lengths, normals = square.edges
        np.testing.assert_allclose(lengths, 1.0)
        np.testing.assert_allclose(np.sort(np.mod(normals, 2 * np.pi)), [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-15)


class TestBody:
    def test_disk_support(self):
        D = disk(2.0, center=(1.0, -0.5))
        np.testing.assert_allclose(D.support(TH), 2 + np.cos(TH) - 0.5 * np.sin(TH), atol=1e-14)

    def test_disk_radius_positive(self):
        with pytest.raises(NonPositiveScale):
            disk(0.0)

    def test_grid_too_small(self):
        with pytest.raises(InvalidInput):
            Body2D(1.0, np.zeros(32), grid_M=32)

    def test_nonconvex_fourier_rejected(self):
        c = np.zeros(8, dtype=complex)
        c[2] = 0.2  # 1 + 0.4 cos(3 theta) has negative curvature
        with pytest.raises(NonConvexInput):
            from_fourier(1.0, c)

    def test_point_is_degenerate(self):
        with pytest.raises(DegenerateInput):
            body2d.validate(body2d.point((1, 2)))

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            minkowski_sum(disk(grid_M=128), disk(grid_M=256))

    @given(bodies(), bodies())
    def test_minkowski_sum_adds_supports(self, X, Y):
        np.testing.assert_allclose(minkowski_sum(X, Y).support(TH), X.support(TH) + Y.support(TH), atol=1e-12)

    def test_polygon_sum_is_exact(self, square):
        S = minkowski_sum(square, scale_translate(square, 2.0, (1, 1)))
        assert S.vertices.shape == (4, 2)
        np.testing.assert_allclose(S.support(TH), 3 * square.support(TH) + np.cos(TH) + np.sin(TH), atol=1e-14)

    @given(bodies(), st.floats(0.1, 10.0), st.floats(-5, 5), st.floats(-5, 5))
    def test_scale_translate(self, X, lam, b1, b2):
        Y = scale_translate(X, lam, (b1, b2))
        np.testing.assert_allclose(Y.support(TH), lam * X.support(TH) + b1 * np.cos(TH) + b2 * np.sin(TH), atol=1e-11)

    def test_scale_must_be_positive(self, square):
        with pytest.raises(NonPositiveScale):
            scale_translate(square, -1.0)

    def test_combination(self, square):
        D = disk(1.0)
        C = minkowski_combination([2.0, 0.5], [square, D])
        np.testing.assert_allclose(C.support(TH), 2 * square.support(TH) + 0.5, atol=1e-14)

    def test_translation_part(self):
        D = disk(1.0, center=(0.3, -0.7))
        np.testing.assert_allclose(D.translation_part(), [0.3, -0.7])


class TestApplyOp:
    @given(bodies(), angles)
    def test_rotation_shifts_support(self, X, a):
        Y = apply_op(LinearOp2.rotation(a), X)
        np.testing.assert_allclose(Y.support(TH), X.support(TH - a), atol=1e-12)

    @given(bodies(), angles)
    def test_reflection(self, X, phi):
        F = LinearOp2.reflection(phi)
        Y = apply_op(F, X)
        # h_{FX}(u) = h_X(F^T u), and F^T u(theta) = u(2 phi - theta)
        np.testing.assert_allclose(Y.support(TH), X.support(2 * phi - TH), atol=1e-12)

    def test_polygon_rotation_exact(self, square):
        Y = apply_op(LinearOp2.rotation(np.pi / 4), square)
        lengths, _ = Y.edges
        np.testing.assert_allclose(lengths, 1.0)
        np.testing.assert_allclose(Y.support(TH), square.support(TH - np.pi / 4), atol=1e-14)

    def test_polygon_reflection_keeps_orientation(self, square):
        Y = apply_op(LinearOp2.reflection(0.2), square)
        assert body2d.polygon_area(Y.vertices) == pytest.approx(1.0)

    def test_general_operator_on_disk(self):
        a = np.array([[1.3, 0.2], [0.1, 0.8]])
        Y = apply_op(LinearOp2.from_matrix(a), disk(1.0, N=48, grid_M=128))
        # an ellipse is not a trigonometric polynomial; the projection is close
        exact = np.linalg.norm(unit(TH) @ a, axis=1)
        np.testing.assert_allclose(Y.support(TH), exact, atol=1e-6)

    def test_singular(self, square):
        with pytest.raises(SingularOperator):
            apply_op(LinearOp2.from_matrix([[1, 1], [1, 1]]), square)


class TestFourierCoefficients:
    def test_square(self, square):
        c = fourier_coefficients(square, 8)
        assert c[0].real == pytest.approx(2 / np.pi)  # perimeter / 2 pi
        assert c[4].real == pytest.approx(-2 / (15 * np.pi))
        assert abs(c[2]) < 1e-15

    @given(bodies())
    def test_fourier_body(self, X):
        c = fourier_coefficients(X, X.N)
        assert c[0] == X.H0
        np.testing.assert_array_equal(c[1:], X.coeffs)

    def test_polygon_against_quadrature(self, rng):
        P = random_polygon(rng)
        th = np.linspace(0, 2 * np.pi, 1 << 16, endpoint=False)
        h = P.support(th)
        c = fourier_coefficients(P, 6)
        ref = np.array([np.mean(h * np.exp(-1j * p * th)) for p in range(7)])
        np.testing.assert_allclose(c, ref, atol=1e-8)

    def test_projection_of_fourier_body_is_exact(self):
        X = disk(1.5, center=(1, 2))
        Y, res = fourier_projection(X, 40)
        assert res == 0.0 and Y.N == 40
        np.testing.assert_allclose(Y.support(TH), X.support(TH))

    def test_projection_residual_shrinks(self, square):
        r8 = fourier_projection(square, 8)[1]
        r32 = fourier_projection(square, 32)[1]
        assert r32 < r8


class TestJson:
    @given(bodies())
    def test_fourier_roundtrip(self, X):
        Y = from_json(json.loads(json.dumps(to_json(X))))
        np.testing.assert_array_equal(Y.samples, X.samples)

    def test_polygon_roundtrip(self, square):
        d = to_json(square)
        assert d["type"] == "polygon"
        np.testing.assert_array_equal(from_json(d).vertices, square.vertices)

    def test_hybrid_roundtrip(self, square):
        X = minkowski_sum(square, disk(0.5))
        Y = from_json(to_json(X))
        np.testing.assert_allclose(Y.support(TH), X.support(TH))

    def test_disk_spec(self):
        np.testing.assert_allclose(from_json({"type": "disk", "radius": 2}).samples, 2.0)

    def test_too_many_modes(self):
        with pytest.raises(GridMismatch):
            from_json({"type": "fourier", "H0": 1, "coeffs": [[0, 0], [0.01, 0]]}, N=1)

    def test_unknown_type(self):
        with pytest.raises(InvalidInput):
            from_json({"type": "blob"})


def test_interval():
    I = Interval1D(-1.0, 2.0)
    assert I.diameter == 3.0
    with pytest.raises(InvalidInput):
        Interval1D(1.0, 0.0)
