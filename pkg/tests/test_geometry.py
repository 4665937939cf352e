import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minnet.geometry import (
    GeometryError,
    ToleranceConfig,
    angle_at,
    dist_point_to_segment,
    distance,
    fermat_point,
    fermat_point_triples,
    point_segment_distances,
)

# Frozen against a Nelder-Mead multistart oracle on |x-a|+|x-b|+|x-c|
# (see the derivation notes in the test body below).
RIGHT_ISOCELES_FERMAT = (0.21132486540518708, 0.21132486540518708)
RIGHT_ISOCELES_TOTAL = 1.9318516525781366  # == sqrt(2 + sqrt(3))


def coords(dim=3):
    return st.lists(
        st.floats(-100.0, 100.0, allow_nan=False, allow_infinity=False),
        min_size=dim,
        max_size=dim,
    )


class TestDistanceAndAngle:
    def test_distance_basic(self):
        assert distance([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_distance_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            distance([0.0, 0.0], [1.0, 1.0, 1.0])

    def test_distance_rejects_nan(self):
        with pytest.raises(GeometryError):
            distance([0.0, float("nan")], [1.0, 1.0])

    def test_one_dimensional_points_rejected(self):
        with pytest.raises(GeometryError):
            distance([0.0], [1.0])

    def test_angle_right(self):
        assert angle_at([0, 0], [1, 0], [0, 1]) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_angle_straight(self):
        assert angle_at([0, 0], [1, 0], [-1, 0]) == pytest.approx(math.pi, abs=1e-12)

    def test_angle_tiny_is_stable(self):
        # acos-based formulas lose digits here; the atan2 form does not.
        a = angle_at([0.0, 0.0], [1.0, 0.0], [1.0, 1e-9])
        assert a == pytest.approx(1e-9, rel=1e-6)

    def test_angle_degenerate_ray(self):
        with pytest.raises(GeometryError):
            angle_at([1.0, 2.0], [1.0, 2.0], [3.0, 4.0])

    @given(coords(), coords(), coords())
    @settings(max_examples=60)
    def test_triangle_inequality(self, a, b, c):
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9

    @given(coords(), coords())
    @settings(max_examples=60)
    def test_distance_symmetry(self, a, b):
        assert distance(a, b) == distance(b, a)


class TestToleranceConfig:
    def test_defaults_valid(self):
        tol = ToleranceConfig()
        assert tol.eps_tie >= tol.eps_len

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ToleranceConfig(eps_len=0.0)

    def test_rejects_tie_below_len(self):
        with pytest.raises(ValueError):
            ToleranceConfig(eps_len=1e-6, eps_tie=1e-9)


class TestFermatPoint:
    def test_equilateral_gives_center(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
        f = fermat_point(*pts)
        np.testing.assert_allclose(f, [0.5, math.sqrt(3) / 6], atol=1e-12)
        total = sum(np.linalg.norm(f - p) for p in pts)
        assert total == pytest.approx(math.sqrt(3), abs=1e-12)

    def test_right_isoceles_frozen_value(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        f = fermat_point(*pts)
        np.testing.assert_allclose(f, RIGHT_ISOCELES_FERMAT, atol=1e-10)
        total = sum(np.linalg.norm(f - p) for p in pts)
        assert total == pytest.approx(RIGHT_ISOCELES_TOTAL, abs=1e-12)

    def test_obtuse_vertex_absorbs(self):
        # Angle at the origin is 150 degrees: the vertex is the minimizer.
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-math.sqrt(3) / 2, 0.5]])
        f = fermat_point(*pts)
        np.testing.assert_allclose(f, [0.0, 0.0], atol=1e-9)

    def test_exactly_120_is_vertex(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-0.5, math.sqrt(3) / 2]])
        f = fermat_point(*pts)
        np.testing.assert_allclose(f, [0.0, 0.0], atol=1e-9)

    def test_coincident_pair(self):
        f = fermat_point([1.0, 1.0], [1.0, 1.0], [5.0, 5.0])
        np.testing.assert_allclose(f, [1.0, 1.0])

    def test_works_in_3d(self):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
        f = fermat_point(*pts)
        # Minimizer lies in the affine span and beats the centroid.
        fobj = lambda x: sum(np.linalg.norm(x - p) for p in pts)
        assert fobj(f) < fobj(pts.mean(axis=0)) + 1e-12

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_interior_angles_are_120(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1.0, 1.0, (3, 2))
        f = fermat_point(*pts)
        if min(np.linalg.norm(f - p) for p in pts) < 1e-7:
            return  # vertex case: no interior angle condition
        for i, j in [(0, 1), (1, 2), (0, 2)]:
            assert angle_at(f, pts[i], pts[j]) == pytest.approx(2 * math.pi / 3, abs=1e-6)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_never_beaten_by_vertices_or_centroid(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        pts = rng.uniform(-5.0, 5.0, (3, dim))
        f = fermat_point(*pts)
        fobj = lambda x: sum(np.linalg.norm(x - p) for p in pts)
        best_other = min(fobj(p) for p in [pts[0], pts[1], pts[2], pts.mean(axis=0)])
        assert fobj(f) <= best_other + 1e-9


class TestFermatTriplesBatch:
    """The closed-form batch kernel must agree with the Weiszfeld route."""

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_matches_weiszfeld(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 4))
        triples = rng.uniform(-2.0, 2.0, (8, 3, dim))
        batch = fermat_point_triples(triples)
        for k in range(8):
            single = fermat_point(*triples[k])
            assert np.linalg.norm(batch[k] - single) < 1e-8

    def test_vertex_snap_is_exact(self):
        pts = np.array([[[0.0, 0.0], [1.0, 0.0], [-1.0, 0.1]]])
        f = fermat_point_triples(pts)[0]
        assert f[0] == 0.0 and f[1] == 0.0  # exact, not approximate

    def test_shape_validation(self):
        with pytest.raises(GeometryError):
            fermat_point_triples(np.zeros((4, 2, 2)))


class TestPointSegment:
    def test_projection_inside(self):
        assert dist_point_to_segment([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_clamps_to_endpoint(self):
        assert dist_point_to_segment([5.0, 0.0], [-1.0, 0.0], [1.0, 0.0]) == 4.0

    def test_degenerate_segment(self):
        assert dist_point_to_segment([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]) == 5.0

    @given(coords(2), coords(2), coords(2))
    @settings(max_examples=60)
    def test_never_exceeds_endpoint_distance(self, p, a, b):
        d = dist_point_to_segment(p, a, b)
        assert d <= min(distance(p, a), distance(p, b)) + 1e-9

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_matrix_matches_scalar(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-3, 3, (5, 2))
        a = rng.uniform(-3, 3, (4, 2))
        b = rng.uniform(-3, 3, (4, 2))
        mat = point_segment_distances(pts, a, b)
        for i in range(5):
            for j in range(4):
                assert mat[i, j] == pytest.approx(
                    dist_point_to_segment(pts[i], a[j], b[j]), abs=1e-12
                )
