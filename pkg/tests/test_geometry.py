import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrsampling.geometry import (
    BoxDomain,
    clip_box,
    covering_radius,
    polygon_area,
    polygon_quadrature,
    split_by_grid,
    voronoi_cells,
)


class TestBoxDomain:
    def test_basic_properties(self):
        dom = BoxDomain(((0, 3), (1, 2)))
        assert dom.d == 2
        assert dom.measure == 3.0
        assert dom.diameter == pytest.approx(np.sqrt(10))
        assert dom.contains([[0, 1], [3, 2], [3.1, 1.5]]).tolist() == [True, True, False]

    def test_rejects_empty_and_3d(self):
        with pytest.raises(ValueError):
            BoxDomain.interval(1, 1)
        with pytest.raises(ValueError):
            BoxDomain(((0, 1), (0, 1), (0, 1)))

    def test_grid_includes_boundary(self):
        g = BoxDomain.interval(0, 1).grid(0.3)
        assert g[0, 0] == 0 and g[-1, 0] == 1
        assert np.diff(g[:, 0]).max() <= 0.3


class TestPolygons:
    def test_area_and_clip(self):
        sq = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], float)
        assert polygon_area(sq) == 4.0
        assert polygon_area(clip_box(sq, 1, 3, -1, 1)) == pytest.approx(1.0)

    def test_quadrature_exact_for_polynomials(self):
        tri = np.array([[0, 0], [1, 0], [0, 1]], float)
        p, w = polygon_quadrature(tri, 4)
        # int_T x^2 y = 1/60
        assert np.sum(w * p[:, 0] ** 2 * p[:, 1]) == pytest.approx(1 / 60, abs=1e-15)

    def test_split_by_grid_preserves_area(self):
        poly = np.array([[0.3, 0.1], [2.7, 0.4], [2.2, 2.9], [0.5, 2.1]])
        pieces = split_by_grid(poly, np.arange(4.0), np.arange(4.0))
        assert sum(polygon_area(q) for q in pieces) == pytest.approx(polygon_area(poly), abs=1e-13)
        assert len(pieces) > 4


class TestVoronoi:
    def test_interval_cells(self):
        cells = voronoi_cells(np.array([0.5, 0.1, 0.9]), BoxDomain.interval(0, 1))
        np.testing.assert_allclose(cells.intervals, [[0.3, 0.7], [0, 0.3], [0.7, 1.0]])

    def test_duplicate_nodes_get_empty_cells(self):
        cells = voronoi_cells(np.array([0.2, 0.2, 0.8]), BoxDomain.interval(0, 1))
        np.testing.assert_allclose(cells.measures(), [0.5, 0.0, 0.5])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 40))
    def test_square_cells_partition_domain(self, seed, count):
        dom = BoxDomain.square(0, 3)
        nodes = dom.uniform(np.random.default_rng(seed), count)
        cells = voronoi_cells(nodes, dom)
        assert cells.measures().sum() == pytest.approx(9.0, abs=1e-10)

    def test_nearest_node_property(self):
        dom = BoxDomain.square(0, 3)
        rng = np.random.default_rng(3)
        nodes = dom.uniform(rng, 30)
        cells = voronoi_cells(nodes, dom)
        for i, poly in enumerate(cells.polygons):
            centroid = poly.mean(axis=0)
            d = np.linalg.norm(nodes - centroid, axis=1)
            assert np.argmin(d) == i

    def test_covering_radius(self):
        dom = BoxDomain.interval(0, 1)
        r, worst = covering_radius(np.array([0.25, 0.75]), dom, 1 / 64)
        assert r == pytest.approx(0.25)
        assert worst[0] in (0.0, 0.5, 1.0)
