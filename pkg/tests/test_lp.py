import numpy as np
import pytest

from randpoly.errors import CycleLimitExceeded, NumericalBreakdown
from randpoly.lp import Infeasible, Optimal, SimplexSolver, StandardFormLP, Unbounded, solve


def test_cross_polytope_vertex_reaches_one(cross_lp_data):
    result = solve(StandardFormLP(*cross_lp_data))
    assert isinstance(result, Optimal)
    assert result.value == pytest.approx(1.0, abs=1e-9)
    A, b, _ = cross_lp_data
    assert np.allclose(A @ result.solution, b, atol=1e-9)
    assert np.all(result.solution >= 0)


def test_zero_feasible_point():
    result = solve(StandardFormLP([[1.0]], [0.0], [1.0]))
    assert isinstance(result, Optimal)
    assert result.value == pytest.approx(0.0, abs=1e-12)


def test_unbounded_direction_reported():
    # maximize x1 s.t. x1 - x2 = 0
    result = solve(StandardFormLP([[1.0, -1.0]], [0.0], [1.0, 0.0]))
    assert isinstance(result, Unbounded)


def test_infeasible_reports_artificial_objective():
    result = solve(StandardFormLP([[1.0, 1.0]], [-1.0], [1.0, 0.0]))
    assert isinstance(result, Infeasible)
    assert result.artificial_objective > 1e-9


def test_redundant_rows_are_dropped():
    A = [[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]
    result = solve(StandardFormLP(A, [1.0, 2.0], [1.0, 2.0, 0.0]))
    assert isinstance(result, Optimal)
    assert result.value == pytest.approx(2.0)


@pytest.mark.parametrize("A,b,c", [
    ([[1.0, 0.0]], [1.0, 2.0], [1.0, 0.0]),
    ([[1.0], [1.0]], [1.0, 1.0], [1.0]),
    ([[np.nan]], [1.0], [1.0]),
])
def test_malformed_problem_rejected(A, b, c):
    with pytest.raises(ValueError):
        StandardFormLP(A, b, c)


def test_nonpositive_tolerance_rejected(cross_lp_data):
    with pytest.raises(ValueError):
        solve(StandardFormLP(*cross_lp_data), tol=0.0)


def test_pivot_cap_raises(cross_lp_data):
    with pytest.raises(CycleLimitExceeded):
        SimplexSolver(max_pivots=0).solve(StandardFormLP(*cross_lp_data))


def test_pivot_floor_raises():
    with pytest.raises(NumericalBreakdown):
        SimplexSolver(pivot_floor=10.0).solve(StandardFormLP([[1.0]], [0.0], [1.0]))


def test_bland_rule_gives_same_optimum(cross_lp_data):
    lp = StandardFormLP(*cross_lp_data)
    dantzig = SimplexSolver().solve(lp)
    bland = SimplexSolver(bland_after=0).solve(lp)
    assert bland.value == pytest.approx(dantzig.value)


def test_optimum_survives_row_and_column_shuffles(cross_lp_data):
    A, b, c = cross_lp_data
    base = solve(StandardFormLP(A, b, c))
    gen = np.random.default_rng(7)
    for _ in range(10):
        rows = gen.permutation(A.shape[0])
        cols = gen.permutation(A.shape[1])
        lp = StandardFormLP(A[rows][:, cols], b[rows], c[cols])
        first, second = solve(lp), solve(lp)
        assert isinstance(first, Optimal)
        assert first.value == pytest.approx(base.value, abs=1e-9)
        # undo the column shuffle and check feasibility in the original problem
        x = np.empty_like(first.solution)
        x[cols] = first.solution
        assert np.allclose(A @ x, b, atol=1e-9)
        assert second.value == first.value
        assert np.array_equal(second.solution, first.solution)
        assert second.pivots == first.pivots
