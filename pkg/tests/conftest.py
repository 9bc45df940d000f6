"""Shared fixtures: small exact polytopes and fixed substreams."""
import numpy as np
import pytest

from randpoly.polytope import cross_polytope, cube_polytope
from utils.rng_utils import Stream


@pytest.fixture
def stream():
    return Stream(1234, ("tests",))


@pytest.fixture
def cross2():
    return cross_polytope(2)


@pytest.fixture
def cross3():
    return cross_polytope(3)


@pytest.fixture
def cube3():
    return cube_polytope(3, 0.5)


@pytest.fixture
def cross_lp_data():
    """maximize t s.t. t e_1 = sum lambda_i v_i, sum lambda_i = 1 over the four vertices of B_1^2."""
    vertices = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    A = np.zeros((3, 5))
    A[:2, 0] = [1.0, 0.0]
    A[:2, 1:] = -vertices.T
    A[2, 1:] = 1.0
    b = np.array([0.0, 0.0, 1.0])
    c = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    return A, b, c
