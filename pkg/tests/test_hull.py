import itertools

import numpy as np
import pytest

from randpoly.errors import DegenerateInput
from randpoly.hull import IncrementalHull, facet_area, simplex_volume


def test_simplex_volume_and_facet_area():
    assert simplex_volume(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])) == pytest.approx(0.5)
    assert simplex_volume(np.vstack([np.zeros(3), np.eye(3)])) == pytest.approx(1.0 / 6.0)
    # unit right triangle lying in R^3
    assert facet_area(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])) == pytest.approx(0.5)


def test_cross_polytope_hull():
    pts = np.vstack([np.eye(3), -np.eye(3)])
    hull = IncrementalHull(pts)
    assert hull.facet_count == 8
    assert hull.volume() == pytest.approx(4.0 / 3.0)
    for f in hull.facets():
        assert f.offset == pytest.approx(1.0 / np.sqrt(3.0))
        assert np.allclose(pts[list(f.vertices)] @ f.normal, f.offset)


def test_cube_flat_faces_are_triangulated():
    pts = np.array(list(itertools.product([-1.0, 1.0], repeat=3)))
    hull = IncrementalHull(pts)
    assert hull.facet_count == 12
    assert hull.volume() == pytest.approx(8.0)
    assert hull.vertex_indices() == list(range(8))


def test_interior_points_are_not_vertices(stream):
    gen = stream.generator
    inner = gen.uniform(-0.5, 0.5, (50, 2))
    square = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    hull = IncrementalHull(np.vstack([inner, square]))
    assert hull.vertex_indices() == [50, 51, 52, 53]
    assert hull.volume() == pytest.approx(4.0)


def test_all_points_inside_every_facet(stream):
    pts = stream.generator.standard_normal((200, 4))
    hull = IncrementalHull(pts)
    for f in hull.facets():
        assert np.all(pts @ f.normal <= f.offset + 1e-9)


def test_segment_in_one_dimension():
    hull = IncrementalHull(np.array([[0.5], [-2.0], [1.0]]))
    assert hull.facet_count == 2
    assert hull.volume() == pytest.approx(3.0)


def test_flat_input_rejected():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    with pytest.raises(DegenerateInput):
        IncrementalHull(pts)
    with pytest.raises(DegenerateInput):
        IncrementalHull(np.eye(3)[:2])
