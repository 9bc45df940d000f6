import numpy as np
import pytest

from randpoly.functionals import (
    FunctionalReport,
    M_value,
    b_value,
    exceedance_envelope,
    exceedance_fraction,
    holder_gap,
    inclusion_constant,
    inner_mean_Dk,
    mean_width,
    moment_ratio,
    outer_radius_envelope,
    outer_radius_Rk,
    p_mean_width,
    polar_volume_radius,
    proj_volume_radius,
    projection_radius_quantile,
    quermass_Qk,
    quermass_profile,
    radius,
    section_k_mean,
    section_radius,
)
from randpoly.geometry import identity_frame, log_unit_ball_volume
from randpoly.measures import Estimate, centroid_body, make_distribution
from randpoly.polytope import EuclideanBall, cross_polytope, cube_polytope


def _within(est: Estimate, expected: float, k: float = 4.0) -> bool:
    return abs(est.value - expected) <= k * est.standard_error + 1e-12


def test_mean_width_of_ball_is_radius(stream):
    est = mean_width(EuclideanBall(2.0, 5), 200, stream)
    assert est.value == pytest.approx(2.0)
    assert est.standard_error == pytest.approx(0.0, abs=1e-12)


def test_mean_width_of_cross_polytope(cross2, stream):
    est = mean_width(cross2, 20_000, stream)
    assert _within(est, 2.0 * np.sqrt(2.0) / np.pi)
    assert est.provenance == "seed=1234/tests"


def test_mean_width_of_cube(stream):
    # h(theta) = |theta|_1 and E|theta_1| = 1/2 on S^2
    est = mean_width(cube_polytope(3, 1.0), 20_000, stream)
    assert _within(est, 1.5)


def test_mean_width_budget_checked(cross2):
    with pytest.raises(ValueError):
        mean_width(cross2, 10)


def test_p_mean_width(cross3, stream):
    w = mean_width(cross3, 2000, stream)
    assert p_mean_width(cross3, 1.0, 2000, stream).value == w.value
    w2 = p_mean_width(cross3, 2.0, 2000, stream)
    assert w2.value >= w.value
    with pytest.raises(ValueError):
        p_mean_width(cross3, -2.0, 2000, stream)
    with pytest.raises(ValueError):
        p_mean_width(cross3, 0.0, 2000, stream)


def test_polar_volume_radius_of_cross_polytope(cross2, stream):
    # polar of B_1^2 is [-1, 1]^2 with volume 4
    est = polar_volume_radius(cross2, 20_000, stream)
    assert _within(est, np.sqrt(4.0 / np.pi))


def test_quermass_top_degree_is_exact(cross2, stream):
    est = quermass_Qk(cross2, 2, 10, stream)
    assert est.kind == "exact"
    assert est.value == pytest.approx(np.sqrt(2.0 / np.pi))


def test_quermass_first_degree_is_mean_width(cross2, stream):
    est = quermass_Qk(cross2, 1, 4000, stream)
    assert _within(est, 2.0 * np.sqrt(2.0) / np.pi)


def test_cube_projection_area_is_quarter_surface(stream):
    # Cauchy: E|P_F K| = surface / 4 = 6 for [-1, 1]^3
    profile = quermass_profile(cube_polytope(3, 1.0), (1, 2, 3), 400, stream)
    assert _within(profile[2], np.sqrt(6.0 / np.pi))
    assert _within(profile[1], 1.5)
    assert profile[3].value == pytest.approx(np.exp((np.log(8.0) - log_unit_ball_volume(3)) / 3.0))


def test_quermass_degree_checked(cross2):
    with pytest.raises(ValueError):
        quermass_Qk(cross2, 3)


def test_projection_volume_radius(cross3):
    assert proj_volume_radius(cross3, identity_frame(3, 2)) == pytest.approx(np.sqrt(2.0 / np.pi))
    assert proj_volume_radius(cross3, identity_frame(3, 1)) == pytest.approx(1.0)


def test_outer_radii(cross3, stream):
    assert radius(cross3) == 1.0
    assert outer_radius_Rk(cross3, 3, 10, stream).value == 1.0
    est = outer_radius_Rk(cross3, 2, 100, stream)
    assert 1.0 / np.sqrt(3.0) <= est.value <= 1.0
    q95 = projection_radius_quantile(cross3, 2, 100, 0.95, stream)
    assert q95 <= 1.0 + 1e-12
    assert outer_radius_envelope(1.0, 2.0, 1, 4) == pytest.approx(2.0)


def test_section_radius_of_cross_polytope(cross3, stream):
    est = section_radius(cross3, identity_frame(3, 2), 500, stream)
    assert est.kind == "lower-bound"
    assert 0.98 <= est.value <= 1.0 + 1e-9
    assert est.witness[2] == pytest.approx(0.0)
    with pytest.raises(ValueError, match="at least 50"):
        section_radius(cross3, identity_frame(3, 2), 49, stream)


def test_section_means(cross3, stream):
    full = inner_mean_Dk(cross3, 3, 5, 2000, stream)
    assert 0.9 <= full.value <= 1.0 + 1e-9
    dk = inner_mean_Dk(cross3, 2, 20, 200, stream)
    mk = section_k_mean(cross3, 2, 20, 200, stream)
    assert dk.value <= mk.value + 1e-12
    assert dk.value <= 1.0 + 1e-9


def test_gauge_averages(cross2, cross3, stream):
    # ||theta||_1 on S^1 averages 4 / pi
    assert _within(M_value(cross2, 20_000, stream), 4.0 / np.pi)
    assert b_value(cross3) == pytest.approx(np.sqrt(3.0))
    assert b_value(cube_polytope(3, 1.0)) == pytest.approx(1.0)


def test_holder_gap_at_least_one(cross3, stream):
    assert holder_gap(cross3, 20_000, stream) >= 1.0


def test_comparison_with_gaussian_centroid_body(cross3, stream):
    body = centroid_body(make_distribution("gaussian", 3), 2.0)
    c = inclusion_constant(cross3, body, 1000, stream)
    assert c.kind == "upper-bound"
    assert 1.0 / np.sqrt(3.0) - 1e-12 <= c.value <= 1.0
    ratio = moment_ratio(cross3, body, 1000, stream)
    assert c.value <= ratio.value <= 1.0
    assert exceedance_fraction(cross3, body, 0.5, 1000, stream).value == 1.0
    assert exceedance_envelope(10, 2.0, 3.0) == pytest.approx(1.25)


def test_report_row(stream):
    report = FunctionalReport("Q_k", Estimate(1.5, 0.1, 200, "seed=0/x"), {"k": 2}, {"subspaces": 200})
    row = report.to_row(3)
    assert (row.trial, row.functional, row.k, row.budget, row.seed) == (3, "Q_k", 2, 200, "seed=0/x")
    with pytest.raises(ValueError):
        FunctionalReport("Q_k", Estimate(1.5, 0.1, 200), budgets={"subspaces": 0})
