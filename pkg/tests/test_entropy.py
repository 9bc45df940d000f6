import numpy as np
import pytest

from randpoly.entropy import (
    CoveringReport,
    containment_quantiles,
    covering_pool,
    covering_upper,
    dual_entropy_envelope,
    farthest_point_traversal,
    fitted_constant,
    large_scale_envelope,
    regularity_envelope,
    regularity_profile,
    section_lower_bound_check,
    section_lower_envelope,
    section_upper_envelope,
    small_scale_envelope,
    sudakov_envelope,
)
from randpoly.polytope import EuclideanBall, gauge_many, scaled


def test_doubled_cross_polytope_net(cross2, stream):
    net = covering_upper(scaled(cross2, 2.0), cross2, 1.0, 1024, stream)
    assert 4 <= net.size <= 16
    assert net.pool_covered
    assert net.centers.shape == (net.size, 2)
    assert net.log_size == pytest.approx(np.log(net.size))


def test_net_centers_cover_pool(cross2, stream):
    A = scaled(cross2, 2.0)
    pool = covering_pool(A, 512, stream)
    net = covering_upper(A, cross2, 0.5, pool=pool, rng=stream)
    dist = np.min([gauge_many(cross2, pool - c) for c in net.centers], axis=0)
    assert np.all(dist <= 0.5 * (1 + 1e-9))


def test_scale_must_be_positive(cross2):
    with pytest.raises(ValueError):
        covering_upper(cross2, cross2, 0.0)


def test_pool_lies_in_body(cross2, stream):
    pool = covering_pool(cross2, 100, stream)
    # origin, signed generators, boundary and interior points
    assert pool.shape == (1 + 4 + 50 + 50, 2)
    assert np.all(pool[0] == 0.0)
    assert np.all(gauge_many(cross2, pool) <= 1.0 + 1e-9)


def test_traversal_radii_decrease(stream):
    pool = stream.generator.uniform(-1.0, 1.0, (300, 3))
    order, radii = farthest_point_traversal(pool, EuclideanBall(1.0, 3), 0.0, max_centers=40)
    assert order[0] == 0
    assert len(set(order.tolist())) == len(order) == 40
    assert np.all(np.diff(radii) <= 1e-12)


def test_regularity_profile_counts(cross3, stream):
    primal, dual = regularity_profile(cross3, [2.0, 0.5, 1.0], {"pool": 512}, stream)
    for report in (primal, dual):
        assert np.array_equal(report.t_grid, [0.5, 1.0, 2.0])
        assert np.all(np.diff(report.counts) <= 0)
        assert np.allclose(report.upper, np.log(report.counts))
        assert report.lower is not None
        assert report.envelope[0] == pytest.approx(regularity_envelope(3, 0.5))
    assert primal.direction == "primal" and dual.direction == "dual"


def test_regularity_profile_grid_checked(cross3):
    with pytest.raises(ValueError):
        regularity_profile(cross3, [0.0, 1.0])


def test_report_fitted_constants():
    report = CoveringReport("primal", np.array([1.0, 2.0]), np.array([8, 4]),
                            np.log([8.0, 4.0]), None, np.array([2.0, 0.0]), True)
    assert np.allclose(report.fitted_c, [np.log(8.0) / 2.0, 0.0])


def test_envelopes():
    assert sudakov_envelope(1.0, 4, 2.0) == pytest.approx(1.0)
    assert dual_entropy_envelope(2, np.e, 1.0) == pytest.approx(2.0 * np.log(2.0))
    assert regularity_envelope(3, 1.0) == pytest.approx(3.0 * np.log(3.0) ** 2 * np.log(2.0))
    assert small_scale_envelope(4, 2.0) == pytest.approx(1.0)
    assert large_scale_envelope(np.e, 1.0) == pytest.approx(np.e)
    assert section_upper_envelope(np.exp(4.0), 4, 2) == pytest.approx(2.0 * np.sqrt(2.0) * np.log(2.0))
    assert section_lower_envelope(np.exp(4.0), 3, 2) == pytest.approx(4.0 / (3.0 * np.log(3.0) ** 3))
    with pytest.raises(ValueError):
        section_upper_envelope(100, 4, 4)


def test_fitted_constant():
    assert fitted_constant([1.0, 4.0, 5.0], [2.0, 1.0, 0.0]) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        fitted_constant([1.0], [0.0])


def test_section_checks(cross3, stream):
    check = section_lower_bound_check(cross3, 2, 10, 100, stream)
    assert check.radii.shape == (10,)
    assert np.all(check.radii <= 1.0 + 1e-9)
    assert check.min_ratio == pytest.approx(np.min(check.radii) / check.envelope)
    quantiles = containment_quantiles(cross3, 1, 10, 100, stream)
    assert sorted(quantiles) == [0.5, 0.9]
    assert quantiles[0.5] <= quantiles[0.9]
    with pytest.raises(ValueError):
        containment_quantiles(cross3, 3)
