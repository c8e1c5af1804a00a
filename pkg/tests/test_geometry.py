from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgspi import geometry as G
from pgspi.geometry import Polygon, Region

import oracles

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=6)
points = st.tuples(rationals, rationals)
point_lists = st.lists(points, min_size=1, max_size=8)


def region(*polys) -> Region:
    return Region.of(Polygon.of(p) for p in polys)


def P(*coords):
    return tuple(F(c) for c in coords)


class TestHull:
    def test_triangle_ccw_from_lex_smallest(self):
        poly = Polygon.of([P(3, 1), P(0, 0), P(1, 3), P(1, 1)])
        assert poly.vertices == (P(0, 0), P(3, 1), P(1, 3))

    def test_collinear_points_give_segment(self):
        poly = Polygon.of([P(0, 0), P(1, 1), P(2, 2)])
        assert poly.vertices == (P(0, 0), P(2, 2))
        assert poly.dimension == 1

    def test_single_point(self):
        assert Polygon.of([P(1, 2)] * 3).vertices == (P(1, 2),)

    @given(point_lists)
    def test_matches_gift_wrapping(self, pts):
        assert set(Polygon.of(pts).vertices) == oracles.hull_vertices(pts)


class TestIntersect:
    def test_hull_with_segment(self):
        tri = region([P(0, 0), P(3, 1), P(1, 3)])
        seg = region([P(0, 1), P(4, 1)])
        # the left edge crosses y=1 at x=1/3
        assert G.intersect(tri, seg) == region([P(F(1, 3), 1), P(3, 1)])

    def test_disjoint_is_empty(self):
        assert G.intersect(region([P(0, 0)]), region([P(1, 1)])).is_empty()

    def test_touching_corner(self):
        a = region([P(0, 0), P(1, 0), P(1, 1), P(0, 1)])
        b = region([P(1, 1), P(2, 1), P(2, 2)])
        assert G.intersect(a, b) == region([P(1, 1)])

    @given(point_lists, point_lists)
    @settings(max_examples=150)
    def test_matches_edge_crossing_oracle(self, a, b):
        got = G.intersect(region(a), region(b))
        want = oracles.intersection_vertices(a, b)
        assert set(got.vertices()) == want

    @given(point_lists, point_lists)
    @settings(max_examples=100)
    def test_commutes(self, a, b):
        assert G.intersect(region(a), region(b)) == G.intersect(region(b), region(a))


class TestSubset:
    def test_segment_covered_by_two_pieces(self):
        seg = region([P(0, 0), P(2, 0)])
        halves = region([P(0, 0), P(1, 0)], [P(1, 0), P(2, 0)])
        assert G.issubset(seg, halves)

    def test_square_not_covered_by_triangles_with_gap(self):
        sq = region([P(0, 0), P(2, 0), P(2, 2), P(0, 2)])
        parts = region([P(0, 0), P(2, 0), P(0, 2)], [P(2, 1), P(2, 2), P(1, 2)])
        assert not G.issubset(sq, parts)

    def test_square_covered_by_its_two_halves(self):
        sq = region([P(0, 0), P(2, 0), P(2, 2), P(0, 2)])
        parts = region([P(0, 0), P(2, 0), P(0, 2)], [P(2, 0), P(2, 2), P(0, 2)])
        assert G.same_set(sq, parts)

    @given(point_lists, point_lists)
    @settings(max_examples=100)
    def test_union_contains_both(self, a, b):
        ra, rb = region(a), region(b)
        u = G.union(ra, rb)
        assert G.issubset(ra, u) and G.issubset(rb, u)


class TestFrontier:
    def test_scheduling_hull(self):
        tri = region([P(0, 0), P(3, 1), P(1, 3)])
        assert G.frontier(tri) == region([P(1, 3), P(3, 1)])

    def test_dominating_point_splits_segment(self):
        r = region([P(0, 2), P(2, 0)], [P(1, F(3, 2))])
        want = region([P(0, 2), P(F(1, 2), F(3, 2))], [P(1, 1), P(2, 0)], [P(1, F(3, 2))])
        assert G.frontier(r) == want

    def test_box_has_single_corner(self):
        assert G.frontier(region([P(0, 0), P(1, 0), P(1, 1), P(0, 1)])) == region([P(1, 1)])

    @given(point_lists)
    @settings(max_examples=150)
    def test_single_polygon_matches_dominance_oracle(self, pts):
        eff = oracles.efficient_vertices(pts)
        got = G.frontier(region(pts))
        assert sorted(got.vertices()) == eff

    @given(point_lists, point_lists)
    @settings(max_examples=100)
    def test_no_point_strictly_dominates_another(self, a, b):
        verts = G.frontier(G.union(region(a), region(b))).vertices()
        for x in verts:
            for y in verts:
                assert not (y[0] > x[0] and y[1] > x[1])

    @given(point_lists, point_lists)
    @settings(max_examples=100)
    def test_frontier_inside_region(self, a, b):
        r = G.union(region(a), region(b))
        assert G.issubset(G.frontier(r), r)


class TestSerialization:
    def test_round_trip(self):
        r = region([P(0, 0), P(F(1, 3), 2)], [P(5, 5)])
        assert G.region_from_json(G.region_to_json(r)) == r

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            G.parse_rational("3/0")

    def test_point_mode_round_trip(self):
        r = Region.of_points([P(1, 2, 3), P(0, 0, 1)])
        assert G.region_from_json(G.region_to_json(r)) == r


def test_random_polygons_seeded_intersection_sample():
    rng = random.Random(7)
    for _ in range(50):
        a, b = oracles.rand_points(rng), oracles.rand_points(rng)
        got = G.intersect(region(a), region(b))
        assert set(got.vertices()) == oracles.intersection_vertices(a, b)
