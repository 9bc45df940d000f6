import itertools

import numpy as np
import pytest

from randpoly.errors import DegenerateInput, SingularFacet
from randpoly.isoconst import (
    BodyMoments,
    bernstein_check,
    body_moments,
    dirichlet_second_moments,
    facet_second_moment,
    facet_second_moment_mc,
    isotropic_constant,
    kk_bound_pipeline,
    max_facet_bound,
    marginal_sums,
    max_signed_sum,
    sign_max_bound,
    simplex_moments,
    split_rhat,
)
from randpoly.measures import make_distribution, sample
from randpoly.polytope import linear_image


def test_simplex_moments_of_standard_triangle():
    vol, first, second = simplex_moments([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert vol == pytest.approx(0.5)
    assert np.allclose(first, [1.0 / 6.0, 1.0 / 6.0])
    assert np.allclose(second, [[1.0 / 12.0, 1.0 / 24.0], [1.0 / 24.0, 1.0 / 12.0]])
    with pytest.raises(ValueError):
        simplex_moments([[0.0, 0.0], [1.0, 0.0]])


def test_exact_moments_of_cross_polytope(cross2):
    m = body_moments(cross2, "exact")
    assert m.volume == pytest.approx(2.0)
    assert np.allclose(m.center, 0.0)
    assert m.trace == pytest.approx(1.0 / 3.0)
    assert isotropic_constant(cross2, m) == pytest.approx(1.0 / np.sqrt(12.0))


def test_cube_isotropic_constant(cube3):
    assert isotropic_constant(cube3) == pytest.approx(1.0 / np.sqrt(12.0))


def test_isotropic_constant_is_affine_invariant(cross3):
    T = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 0.5], [0.3, 0.0, 3.0]])
    assert isotropic_constant(linear_image(cross3, T)) == pytest.approx(isotropic_constant(cross3))


def test_rejection_moments(cross2, stream):
    m = body_moments(cross2, "rejection", 20_000, stream)
    assert m.samples == 20_000
    assert abs(m.trace - 1.0 / 3.0) <= 4.0 * m.trace_se
    assert m.volume == pytest.approx(2.0, rel=0.05)


def test_hit_and_run_moments(cross2, stream):
    m = body_moments(cross2, "hit-and-run", 16_000, stream)
    assert m.samples == 16_000
    assert m.converged
    assert m.rhat <= 1.1
    assert m.trace == pytest.approx(1.0 / 3.0, abs=0.02)
    assert m.volume == pytest.approx(2.0)


def test_unknown_moments_mode(cross2):
    with pytest.raises(ValueError):
        body_moments(cross2, "gibbs")


def test_moments_validation():
    with pytest.raises(ValueError):
        BodyMoments(1.0, np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]), "x")
    with pytest.raises(DegenerateInput):
        isotropic_constant(None, BodyMoments(None, np.zeros(2), np.eye(2), "x"))
    with pytest.raises(DegenerateInput):
        isotropic_constant(None, BodyMoments(1.0, np.zeros(2), np.zeros((2, 2)), "x"))


def test_split_rhat(stream):
    gen = stream.generator
    assert split_rhat(gen.standard_normal((8, 2000))) == pytest.approx(1.0, abs=0.02)
    shifted = gen.standard_normal((8, 2000)) + np.arange(8)[:, None]
    assert split_rhat(shifted) > 1.1
    assert split_rhat(np.zeros((4, 3))) == np.inf


def test_facet_second_moment_closed_form():
    assert facet_second_moment(np.eye(2)) == pytest.approx(2.0 / 3.0)
    with pytest.raises(SingularFacet):
        facet_second_moment(np.array([[1.0, 0.0], [2.0, 0.0]]))


def test_facet_second_moment_matches_monte_carlo(stream):
    gen = stream.child("simplices").generator
    for i in range(5):
        Y = gen.standard_normal((3, 3))
        mc = facet_second_moment_mc(Y, 100_000, stream.child("facet", i))
        assert mc == pytest.approx(facet_second_moment(Y), rel=0.02)


def test_dirichlet_second_moments(stream):
    got = dirichlet_second_moments(3, 200_000, stream)
    expected = np.full((3, 3), 1.0 / 12.0) + np.eye(3) / 12.0
    assert np.allclose(got, expected, atol=0.002)


def test_max_facet_bound_of_cross_polytope(cross3):
    assert max_facet_bound(cross3) == pytest.approx(0.3)


def test_sign_bound_of_repeated_vector():
    assert sign_max_bound(np.array([[1.0, 0.0], [1.0, 0.0]])) == pytest.approx(4.0 / 3.0)


def test_exhaustive_sign_search_is_exact(stream):
    Y = stream.generator.standard_normal((6, 3))
    brute = max(float(np.sum((np.array(eps) @ Y) ** 2))
                for eps in itertools.product([-1.0, 1.0], repeat=6))
    value, exact = max_signed_sum(Y)
    assert exact
    assert value == pytest.approx(brute)


def test_greedy_sign_search_is_a_lower_bound(stream):
    Y = stream.generator.standard_normal((12, 4))
    exact_value, _ = max_signed_sum(Y)
    greedy, exact = max_signed_sum(Y, stream, exhaustive_limit=0)
    assert not exact
    assert 0.9 * exact_value <= greedy <= exact_value + 1e-9


def test_bound_chain_on_cross_polytope(cross3, stream):
    report = kk_bound_pipeline(cross3, rng=stream)
    assert report.interior == pytest.approx(0.3)
    assert report.facet_bound == pytest.approx(0.3)
    assert report.sign_bound == pytest.approx(0.3)
    assert report.sign_exact
    assert report.facet_count == 8
    assert report.facet_count_ok
    assert not report.perturbed
    assert report.chain_violations() == []
    assert report.isotropic_constant <= report.l_bound_interior * (1 + 1e-9)
    assert report.log_ratio == pytest.approx(np.log(2.0))
    assert report.volume_radius == pytest.approx((4.0 / 3.0) ** (1.0 / 3.0))


def test_bound_chain_on_random_polytope(stream):
    from randpoly.polytope import random_polytope
    K = random_polytope(make_distribution("gaussian", 4), 12, stream.child("K"))
    report = kk_bound_pipeline(K, rng=stream)
    assert report.chain_violations() == []
    assert report.l_bound_interior <= report.l_bound_facet <= report.l_bound_sign + 1e-12


def test_bound_chain_without_facets(cross2, stream):
    report = kk_bound_pipeline(cross2, samples=4000, rng=stream, cap=1)
    assert report.facet_bound is None and report.sign_bound is None
    assert report.facet_count is None
    assert report.interior == pytest.approx(1.0 / 3.0, abs=0.03)
    assert report.provenance == "hit-and-run"


def test_bernstein_check_on_cube_coordinates(stream):
    dist = make_distribution("cube", 16)
    a = np.full(16, 0.25)
    report = bernstein_check(dist, a, 1.0, [1.0, 2.0, 3.0], 50_000, stream)
    assert len(report.rows) == 3
    assert report.holds
    assert report.fitted_c >= report.c
    for row in report.rows:
        assert row.ci_low <= row.probability <= row.ci_high
    with pytest.raises(ValueError):
        bernstein_check(dist, [], 1.0, [1.0])
    with pytest.raises(ValueError):
        bernstein_check(dist, a, 1.0, [1.0], theta=np.ones(3))


def test_marginal_sums_use_independent_points_on_ball(stream):
    # one ball point caps |sum a_j x_j| at |a| sqrt(n + 2); independent points do not
    n = 4
    dist = make_distribution("ball", n, stream.child("dist"))
    a = np.full(n, 0.5)
    count = 50_000
    sums = np.abs(marginal_sums(dist, a, count, stream.child("sums")))
    assert np.mean(sums >= 2.6) > 0.001

    product = sample(dist, count * n, stream.child("product"))[:, 0].reshape(count, n) @ a
    for t in (0.5, 1.0, 2.0):
        assert np.mean(sums >= t) == pytest.approx(np.mean(np.abs(product) >= t), abs=0.015)

    report = bernstein_check(dist, a, 1.0, [0.5, 1.0, 2.0], count, stream.child("sums"))
    assert [r.probability for r in report.rows] == pytest.approx([np.mean(sums >= t) for t in (0.5, 1.0, 2.0)])
