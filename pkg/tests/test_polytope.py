import numpy as np
import pytest

from randpoly.errors import CapExceeded, DegenerateInput, DimensionMismatch
from randpoly.measures import make_distribution
from randpoly.polytope import (
    EuclideanBall,
    VertexPolytope,
    contains,
    contains_many,
    cross_polytope,
    cube_polytope,
    exit_distance,
    facet_arrays,
    facet_enumeration,
    facet_oracle_available,
    gauge,
    gauge_many,
    linear_image,
    radial,
    random_polytope,
    read_point_cloud,
    scaled,
    support,
    support_many,
    volume_exact,
    volume_mc,
    with_generators,
    write_point_cloud,
)


def test_support_of_cross_polytope(cross3):
    assert support(cross3, [1.0, 0.0, 0.0]) == pytest.approx(1.0)
    theta = np.ones(3) / np.sqrt(3.0)
    assert support(cross3, theta) == pytest.approx(1.0 / np.sqrt(3.0))
    assert support(cross3, -theta) == support(cross3, theta)


@pytest.mark.parametrize("method", ["lp", "facets"])
def test_gauge_of_cross_polytope(cross3, method):
    assert gauge(cross3, [0.5, 0.5, 0.0], method=method) == pytest.approx(1.0)
    assert gauge(cross3, [0.0, 0.0, 0.0], method=method) == 0.0
    assert gauge(cross3, [0.0, -2.0, 1.0], method=method) == pytest.approx(3.0)


@pytest.mark.parametrize("method", ["lp", "facets"])
def test_radial_of_cross_polytope(cross2, method):
    theta = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert radial(cross2, theta, method=method) == pytest.approx(1.0 / np.sqrt(2.0))


def test_radial_needs_unit_direction(cross2):
    with pytest.raises(ValueError):
        radial(cross2, [1.0, 1.0])


def test_unknown_oracle_method(cross2):
    with pytest.raises(ValueError):
        gauge(cross2, [1.0, 0.0], method="qhull")


def test_dimension_checked(cross3):
    with pytest.raises(DimensionMismatch):
        gauge(cross3, [1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        support(cross3, [1.0, 0.0])


def test_gauge_off_span_is_infinite():
    K = VertexPolytope([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert not facet_oracle_available(K)
    assert gauge(K, [0.0, 0.0, 1.0]) == np.inf
    assert gauge(K, [0.5, 0.0, 0.0]) == pytest.approx(0.5)


def test_lp_and_facet_oracles_agree(stream):
    K = random_polytope(make_distribution("gaussian", 3), 20, stream.child("K"))
    pts = stream.child("pts").generator.standard_normal((25, 3))
    lp = gauge_many(K, pts, method="lp")
    fc = gauge_many(K, pts, method="facets")
    assert np.allclose(lp, fc, rtol=1e-7)


def test_membership(cube3):
    assert contains(cube3, [0.5, -0.5, 0.5])
    assert not contains(cube3, [0.6, 0.0, 0.0])
    assert list(contains_many(cube3, [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])) == [True, False]


@pytest.mark.parametrize("method", ["lp", "facets"])
def test_exit_distance(cross3, method):
    assert exit_distance(cross3, np.zeros(3), [1.0, 0.0, 0.0], method=method) == pytest.approx(1.0)
    assert exit_distance(cross3, [0.5, 0.0, 0.0], [0.0, 1.0, 0.0], method=method) == pytest.approx(0.5)
    assert exit_distance(cross3, [0.5, 0.0, 0.0], [1.0, 0.0, 0.0], method=method) == pytest.approx(0.5)


@pytest.mark.parametrize("n,expected", [(2, 2.0), (3, 4.0 / 3.0), (4, 2.0 / 3.0)])
def test_cross_polytope_volume(n, expected):
    K = cross_polytope(n)
    assert volume_exact(K) == pytest.approx(expected)
    assert facet_enumeration(K).count == 2 ** n


def test_cube_volume_and_generators(cube3):
    assert cube3.N == 4
    assert volume_exact(cube3) == pytest.approx(1.0)
    assert volume_exact(cube_polytope(2, 1.0)) == pytest.approx(4.0)


def test_duplicate_and_antipodal_generators_collapse():
    K = VertexPolytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
    assert facet_enumeration(K).count == 4
    assert volume_exact(K) == pytest.approx(2.0)


def test_volume_monte_carlo(cross2, stream):
    est = volume_mc(cross2, 20_000, stream)
    assert abs(est.value - 2.0) <= 4.0 * est.standard_error
    with pytest.raises(ValueError):
        volume_mc(cross2, 10, stream)


def test_facet_cap_and_degenerate_input():
    with pytest.raises(CapExceeded):
        facet_enumeration(cross_polytope(9))
    with pytest.raises(DegenerateInput):
        facet_enumeration(VertexPolytope([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))


def test_facet_vertices_lie_on_their_hyperplane(stream):
    K = random_polytope(make_distribution("cube", 4), 30, stream)
    enum = facet_enumeration(K)
    assert not enum.perturbed
    for f in enum.facets:
        assert np.allclose(f.vertices @ f.normal, f.offset)
        assert np.all(K.signed_points @ f.normal <= f.offset + 1e-9)


def test_derived_polytopes(cross2):
    assert support(scaled(cross2, 2.0), [1.0, 0.0]) == pytest.approx(2.0)
    T = np.array([[2.0, 0.0], [0.0, 3.0]])
    image = linear_image(cross2, T)
    assert volume_exact(image) == pytest.approx(12.0)
    bigger = with_generators(cross2, [[1.0, 1.0]])
    assert bigger.N == 3
    assert gauge(bigger, [1.0, 1.0]) == pytest.approx(1.0)


def test_euclidean_ball_oracles():
    B = EuclideanBall(2.0, 3)
    assert support_many(B, [[0.0, 1.0, 0.0]])[0] == pytest.approx(2.0)
    assert gauge(B, [0.0, 0.0, 1.0]) == pytest.approx(0.5)
    assert B.volume() == pytest.approx(32.0 * np.pi / 3.0)
    with pytest.raises(ValueError):
        EuclideanBall(0.0, 3)


def test_generators_are_read_only(cross2):
    with pytest.raises(ValueError):
        cross2.generators[0, 0] = 5.0


def test_point_cloud_round_trip(tmp_path, stream):
    K = random_polytope(make_distribution("gaussian", 3), 7, stream)
    write_point_cloud(tmp_path / "k.txt", K, seed=4)
    back, seed = read_point_cloud(tmp_path / "k.txt")
    assert seed == 4
    assert np.array_equal(back.generators, K.generators)


def test_facet_arrays_of_cross_polytope(cross2):
    normals, offsets = facet_arrays(cross2)
    assert normals.shape == (4, 2)
    assert np.allclose(np.abs(normals), 1.0 / np.sqrt(2.0))
    assert np.allclose(offsets, 1.0 / np.sqrt(2.0))
    assert facet_arrays(cross2)[0] is normals
