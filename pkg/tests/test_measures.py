import numpy as np
import pytest

from randpoly.errors import DimensionMismatch, NotEnoughSamples
from randpoly.measures import (
    Estimate,
    SampleCache,
    centroid_body,
    fitted_envelope_constant,
    gamma_q,
    iq_moment,
    isotropic_constant_of,
    make_distribution,
    mean_estimate,
    power_mean_estimate,
    psi_alpha_norm,
    sample,
    small_norm_cdf,
    support_values,
    tail_probabilities,
    zq_mean_width,
    zq_radius,
    zq_support,
)
from utils.rng_utils import Stream


@pytest.mark.parametrize("name", ["gaussian", "cube", "ball", "l1ball"])
def test_families_are_isotropic(name):
    dist = make_distribution(name, 4, Stream(5), pilot=50_000)
    x = sample(dist, 50_000, Stream(6))
    assert np.allclose(x.mean(axis=0), 0.0, atol=0.03)
    assert np.allclose(np.cov(x, rowvar=False), np.eye(4), atol=0.06)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        make_distribution("cauchy", 3)


def test_cube_samples_stay_in_the_cube(stream):
    x = sample(make_distribution("cube", 3), 1000, stream)
    assert np.all(np.abs(x) <= np.sqrt(3.0))


def test_gamma_q_known_values():
    assert gamma_q(2.0) == pytest.approx(1.0)
    assert gamma_q(1.0) == pytest.approx(np.sqrt(2.0 / np.pi))
    assert gamma_q(4.0) == pytest.approx(3.0 ** 0.25)


def test_gaussian_centroid_body_is_closed_form():
    body = centroid_body(make_distribution("gaussian", 3), 2.0)
    est = zq_support(body, [0.0, 1.0, 0.0])
    assert est.kind == "exact"
    assert est.value == pytest.approx(1.0)
    assert zq_mean_width(body, 10).value == pytest.approx(1.0)
    assert zq_radius(body, 5).kind == "exact"


def test_sampled_centroid_body_support(stream):
    dist = make_distribution("cube", 3)
    pts = sample(dist, 100_000, stream)
    est = zq_support(centroid_body(dist, 2.0, pts), [1.0, 0.0, 0.0])
    assert est.kind == "mean"
    assert est.value == pytest.approx(1.0, abs=0.02)
    assert est.standard_error > 0

    thetas = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    values, errors = support_values(centroid_body(dist, 2.0, pts), thetas)
    assert values[0] == pytest.approx(est.value)
    assert values[1] == pytest.approx(1.0, abs=0.02)
    assert np.all(errors > 0)
    with pytest.raises(DimensionMismatch):
        support_values(centroid_body(dist, 2.0, pts), np.ones((1, 2)))


def test_cube_z1_matches_uniform_first_moment(stream):
    # E|U| for U uniform on [-sqrt3, sqrt3] is sqrt3 / 2
    dist = make_distribution("cube", 2)
    pts = sample(dist, 100_000, stream)
    est = zq_support(centroid_body(dist, 1.0, pts), [0.0, 1.0])
    assert est.value == pytest.approx(np.sqrt(3.0) / 2.0, abs=0.01)


def test_centroid_body_needs_sample_and_q():
    cube = make_distribution("cube", 2)
    with pytest.raises(ValueError):
        centroid_body(cube, 2.0)
    with pytest.raises(ValueError):
        centroid_body(make_distribution("gaussian", 2), 0.5)


def test_large_q_needs_more_samples(stream):
    dist = make_distribution("cube", 2)
    body = centroid_body(dist, 10.0, sample(dist, 100, stream))
    with pytest.raises(NotEnoughSamples):
        zq_support(body, [1.0, 0.0])


def test_support_dimension_checked():
    body = centroid_body(make_distribution("gaussian", 3), 2.0)
    with pytest.raises(DimensionMismatch):
        zq_support(body, [1.0, 0.0])


def test_gaussian_psi2_norm(stream):
    dist = make_distribution("gaussian", 2)
    pts = sample(dist, 100_000, stream)
    est = psi_alpha_norm(dist, [1.0, 0.0], 2, pts)
    assert est.value == pytest.approx(np.sqrt(8.0 / 3.0), abs=0.05)


def test_psi_norm_arguments_checked(stream):
    dist = make_distribution("gaussian", 2)
    pts = sample(dist, 20_000, stream)
    with pytest.raises(ValueError):
        psi_alpha_norm(dist, [1.0, 0.0], 3, pts)
    with pytest.raises(ValueError):
        psi_alpha_norm(dist, [1.0, 0.0], 2, pts[:100])


def test_iq_moment_gaussian(stream):
    dist = make_distribution("gaussian", 5)
    est = iq_moment(dist, 2.0, sample(dist, 40_000, stream))
    assert est.value == pytest.approx(np.sqrt(5.0), abs=0.03)
    with pytest.raises(ValueError):
        iq_moment(dist, -5.0, sample(dist, 10_000, stream))


def test_tail_rows(stream):
    dist = make_distribution("gaussian", 16)
    pts = sample(dist, 100_000, stream)
    rows = tail_probabilities(dist, 16, [1.0, 2.0], pts, epsilons=[0.5])
    assert [r.kind for r in rows] == ["deviation", "deviation", "small-ball"]
    dev = rows[0]
    assert dev.threshold == pytest.approx(4.0)
    assert dev.envelope == pytest.approx(np.exp(-4.0))
    assert dev.ci_low <= dev.probability <= dev.ci_high
    # |x| concentrates near 4, so |x| >= 8 never happens
    assert rows[1].probability == 0.0
    assert rows[2].envelope == pytest.approx(0.5 ** 4)
    with pytest.raises(ValueError, match="at least 100000"):
        tail_probabilities(dist, 16, [1.0], pts[:20_000])


def test_small_norm_cdf_fits_linear_constant():
    pts = np.array([[1.0], [2.0], [3.0], [4.0]])
    cdf = small_norm_cdf(pts, [0.5, 1.0])
    # E|x| = 2.5: |x| <= 1.25 for one point, |x| <= 2.5 for two
    assert np.allclose(cdf.probabilities, [0.25, 0.5])
    assert cdf.fitted_c == pytest.approx(0.5)
    for bad in ([0.0, 0.5], [-0.1], []):
        with pytest.raises(ValueError):
            small_norm_cdf(pts, bad)


def test_fitted_envelope_constant():
    assert fitted_envelope_constant([0.1, 0.2, 0.0], [1.0, 0.1, 1.0]) == pytest.approx(2.0)
    assert fitted_envelope_constant([0.0], [1.0]) == 0.0


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(1.0, -0.1, 10)
    with pytest.raises(ValueError):
        Estimate(1.0, 0.1, 10, kind="median")
    assert Estimate(2.0, 0.5, 3).scaled(-2.0).standard_error == pytest.approx(1.0)


def test_power_mean_estimate():
    est = power_mean_estimate([1.0, 2.0, 3.0], 2.0)
    assert est.value == pytest.approx(np.sqrt(14.0 / 3.0))
    assert mean_estimate([1.0, 3.0]).standard_error == pytest.approx(1.0)


def test_isotropic_constants_of_families():
    assert isotropic_constant_of(make_distribution("cube", 3)) == pytest.approx(1.0 / np.sqrt(12.0))
    assert isotropic_constant_of(make_distribution("gaussian", 3)) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))


def test_sample_cache_is_write_once(stream):
    cache = SampleCache()
    dist = make_distribution("gaussian", 2)
    a = cache.get(dist, 10, stream)
    b = cache.get(dist, 10, stream)
    assert a is b
    assert len(cache) == 1
    with pytest.raises(ValueError):
        a[0, 0] = 1.0
