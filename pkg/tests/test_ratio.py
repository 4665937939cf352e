"""Tests for MSTs, Steiner ratios, and the simplex/sausage generators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from minnet.geometry import GeometryError
from minnet.ratio import (
    caterpillar_ratio,
    caterpillar_topology,
    mst,
    sausage_points,
    simplex_points,
    steiner_ratio,
)
EQUILATERAL_RATIO = np.sqrt(3.0) / 2.0
SQUARE_RATIO = (1.0 + np.sqrt(3.0)) / 3.0
# Dual-route frozen values (batched relaxation and an independent BFGS
# multistart over all full topologies agree to 12 decimals).
TETRAHEDRON_RATIO = 0.8130525295851415
SAUSAGE_5PT_RATIO = 0.8154696696737413

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


def scipy_mst_length(pts: np.ndarray) -> float:
    return float(minimum_spanning_tree(squareform(pdist(pts))).sum())


class TestMst:
    def test_two_points_segment(self):
        res = mst([[0.0, 0.0], [3.0, 4.0]])
        assert res.edges == [(0, 1)]
        assert res.length == 5.0

    def test_unit_square(self):
        res = mst(UNIT_SQUARE)
        assert len(res.edges) == 3
        assert res.length == 3.0

    def test_tie_break_by_index_order(self):
        # The square is full of ties; Prim with first-minimal-index selection
        # and strict improvement must always produce this exact edge list.
        res = mst(UNIT_SQUARE)
        assert res.edges == [(0, 1), (1, 2), (0, 3)]

    def test_duplicate_points_zero_edge(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        res = mst(pts)
        assert res.length == 1.0
        assert len(res.edges) == 2
        edge_lens = sorted(
            float(np.linalg.norm(pts[u] - pts[v])) for u, v in res.edges
        )
        assert edge_lens == [0.0, 1.0]

    def test_rejects_single_point(self):
        with pytest.raises(GeometryError):
            mst([[0.0, 0.0]])

    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(min_value=0, max_value=10_000),
        st.integers(min_value=2, max_value=12),
    )
    def test_matches_scipy_and_brackets(self, seed, n):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-5.0, 5.0, size=(n, 2))
        res = mst(pts)
        assert len(res.edges) == n - 1
        assert abs(res.length - scipy_mst_length(pts)) <= 1e-9 * max(1.0, res.length)
        diam = pdist(pts).max()
        assert res.length >= diam - 1e-12


class TestSteinerRatio:
    def test_equilateral(self):
        assert abs(steiner_ratio(EQUILATERAL) - EQUILATERAL_RATIO) < 1e-9

    def test_two_points(self):
        assert steiner_ratio(np.array([[0.0, 1.0], [2.0, 0.0]])) == 1.0

    def test_unit_square(self):
        assert abs(steiner_ratio(UNIT_SQUARE) - SQUARE_RATIO) < 1e-9

    def test_regular_tetrahedron(self):
        r = steiner_ratio(simplex_points(3))
        assert r < 0.8660254
        assert abs(r - TETRAHEDRON_RATIO) < 1e-9

    def test_rigid_motion_and_scale_invariance(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1.0, 1.0, size=(5, 2))
        base = steiner_ratio(pts)
        theta = 0.83
        rot = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        )
        moved = 17.0 * pts @ rot.T + np.array([3.0, -11.0])
        assert abs(steiner_ratio(moved) - base) < 1e-9

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=0, max_value=10_000),
        st.integers(min_value=3, max_value=5),
    )
    def test_ratio_in_unit_interval(self, seed, n):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        if pdist(pts).min() < 1e-3:
            return
        r = steiner_ratio(pts)
        assert 0.7 < r <= 1.0 + 1e-12


class TestSimplexPoints:
    @pytest.mark.parametrize("d", [2, 3, 4, 6])
    def test_unit_pairwise_distances(self, d):
        pts = simplex_points(d)
        assert pts.shape == (d + 1, d)
        assert np.all(np.abs(pdist(pts) - 1.0) < 1e-12)

    def test_rejects_low_dimension(self):
        with pytest.raises(GeometryError):
            simplex_points(1)


class TestSausagePoints:
    def test_prefix_is_simplex(self):
        np.testing.assert_allclose(
            sausage_points(3, 7)[:4], simplex_points(3), atol=1e-15
        )

    def test_consecutive_tetrahedra_are_unit(self):
        pts = sausage_points(3, 6)
        for i in range(3):
            assert np.all(np.abs(pdist(pts[i : i + 4]) - 1.0) < 1e-12)

    def test_planar_strip(self):
        pts = sausage_points(2, 6)
        for i in range(4):
            assert np.all(np.abs(pdist(pts[i : i + 3]) - 1.0) < 1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(GeometryError):
            sausage_points(4, 6)
        with pytest.raises(GeometryError):
            sausage_points(3, 3)


class TestCaterpillar:
    def test_topology_shape(self):
        topo = caterpillar_topology(5)
        assert topo.n_terminals == 5
        assert topo.n_steiner == 3
        degree = {}
        for u, v in topo.edges:
            degree[u] = degree.get(u, 0) + 1
            degree[v] = degree.get(v, 0) + 1
        assert all(degree[t] == 1 for t in range(5))
        assert all(degree[s] == 3 for s in range(5, 8))

    def test_restriction_is_upper_bound(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0.0, 1.0, size=(6, 2))
        assert caterpillar_ratio(pts) >= steiner_ratio(pts) - 1e-12

    def test_tight_for_square_in_cyclic_order(self):
        assert abs(caterpillar_ratio(UNIT_SQUARE) - SQUARE_RATIO) < 1e-9

    def test_tight_for_small_sausages(self):
        for n in (5, 6):
            pts = sausage_points(3, n)
            assert abs(caterpillar_ratio(pts) - steiner_ratio(pts)) < 1e-9


class TestSausageTrend:
    def test_five_point_uptick_is_real(self):
        # The 5-point sausage ratio genuinely exceeds the tetrahedron's; both
        # values are pinned by two independent optimizers.  Monotone decrease
        # only holds when sausages are indexed by glued tetrahedra, which is
        # what the trend test below does.  Do not "fix" this.
        r4 = steiner_ratio(sausage_points(3, 4))
        r5 = steiner_ratio(sausage_points(3, 5))
        assert abs(r4 - TETRAHEDRON_RATIO) < 1e-9
        assert abs(r5 - SAUSAGE_5PT_RATIO) < 1e-9
        assert r5 > r4

    def test_ratio_decreases_with_glued_tetrahedra(self):
        ratios = [
            caterpillar_ratio(sausage_points(3, k + 3)) for k in range(4, 8)
        ]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
        assert all(0.774 < r < TETRAHEDRON_RATIO for r in ratios)

    def test_two_sausage_triangle_base_case(self):
        assert abs(caterpillar_ratio(sausage_points(2, 3)) - EQUILATERAL_RATIO) < 1e-9
