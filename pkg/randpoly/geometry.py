"""
Sphere and Grassmannian sampling, projections, unit-ball volumes

Uniform directions on S^{n-1} come from normalized Gaussian vectors; Haar
k-frames come from Gram-Schmidt (with one re-orthogonalization pass) of k
independent Gaussian vectors. All samplers are pure functions of the Stream
they are given.

Functions:
    sample_sphere(n, rng):              One uniform unit vector
    sample_sphere_many(n, count, rng):  (count, n) array of unit vectors
    sample_frame(n, k, rng):            Haar-distributed Frame on G_{n,k}
    nested_frames(n, ks, rng):          Frames for several k from one Haar basis
    identity_frame(n, k):               Frame spanned by e_1..e_k
    project(points, frame):             Coordinates of P_F x in the frame basis
    unit_ball_volume(k):                omega_k = pi^{k/2} / Gamma(k/2 + 1)
    log_unit_ball_volume(k):            log(omega_k)
"""
from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np
from scipy.special import gammaln

from randpoly.errors import DimensionMismatch
from utils.rng_utils import Stream, as_stream

GRAM_TOL = 1e-10


@dataclass(frozen=True)
class Frame:
    """Orthonormal k-frame; `basis` is n x k with orthonormal columns."""
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2 or not 1 <= basis.shape[1] <= basis.shape[0]:
            raise ValueError(f"frame basis must be n x k with 1 <= k <= n, got {basis.shape}")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > GRAM_TOL:
            raise ValueError("frame columns are not orthonormal")
        object.__setattr__(self, "basis", basis)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def embed(self, coords: np.ndarray) -> np.ndarray:
        """Map frame coordinates back to R^n."""
        coords = np.asarray(coords, dtype=float)
        return coords @ self.basis.T


def as_unit_vector(theta, tol: float = 1e-9) -> np.ndarray:
    """Validate a direction; raises ValueError off the sphere."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if abs(np.linalg.norm(theta) - 1.0) > tol:
        raise ValueError("direction is not a unit vector")
    return theta


def sample_sphere_many(n: int, count: int, rng: Stream) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_stream(rng).generator
    g = gen.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1)
    # A zero Gaussian vector has probability zero; redraw if it happens.
    bad = norms == 0.0
    while np.any(bad):
        g[bad] = gen.standard_normal((int(bad.sum()), n))
        norms[bad] = np.linalg.norm(g[bad], axis=1)
        bad = norms == 0.0
    return g / norms[:, None]


def sample_sphere(n: int, rng: Stream) -> np.ndarray:
    return sample_sphere_many(n, 1, rng)[0]


def _orthonormalize(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt with re-orthogonalization; None if rank deficient."""
    n, k = g.shape
    q = np.zeros((n, k))
    for j in range(k):
        v = g[:, j].copy()
        for _ in range(2):
            v -= q[:, :j] @ (q[:, :j].T @ v)
        norm = np.linalg.norm(v)
        if norm <= 1e-12 * max(1.0, np.linalg.norm(g[:, j])):
            return None
        q[:, j] = v / norm
    return q


def _haar_basis(n: int, k: int, gen: np.random.Generator) -> np.ndarray:
    while True:
        q = _orthonormalize(gen.standard_normal((n, k)))
        if q is not None:
            return q


def sample_frame(n: int, k: int, rng: Stream) -> Frame:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return Frame(_haar_basis(n, k, as_stream(rng).generator))


def nested_frames(n: int, ks: Iterable[int], rng: Stream) -> Dict[int, Frame]:
    """
    Frames F_k = span of the first k columns of one Haar n x max(ks) basis.

    Each F_k is Haar on G_{n,k}; the frames are nested, which gives common
    random numbers across k.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1 or ks[-1] > n:
        raise ValueError("ks must lie in [1, n]")
    q = _haar_basis(n, ks[-1], as_stream(rng).generator)
    return {k: Frame(q[:, :k]) for k in ks}


def identity_frame(n: int, k: int) -> Frame:
    return Frame(np.eye(n)[:, :k])


def project(points, frame: Frame) -> np.ndarray:
    """
    Coordinates of P_F x in the frame basis; |y| = |P_F x|.

    Accepts one point (shape n) or many (shape m x n).
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != frame.n:
        raise DimensionMismatch(f"points have dimension {pts.shape[-1]}, frame has n={frame.n}")
    return pts @ frame.basis


def log_unit_ball_volume(k: int) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return 0.5 * k * np.log(np.pi) - gammaln(0.5 * k + 1.0)


def unit_ball_volume(k: int) -> float:
    return float(np.exp(log_unit_ball_volume(k)))
