"""
Symmetric vertex polytopes K = conv{+-x_1, ..., +-x_N}

Only the N generators are stored; the signed copies are implicit, so
h(theta) = h(-theta) holds exactly. Support and radius are closed forms over
the generators. Gauge, radial function, membership and chord lengths come
from either the simplex LP (any n) or the facet list (n <= 6 by default,
where enumeration is cheap); the facet list is computed once per polytope
and cached.

LP layouts (all data divided by the largest generator norm first):

| Query      | Variables            | Constraints                               |
|------------|----------------------|-------------------------------------------|
| gauge      | t, lambda (2N)       | t u - sum lambda v = 0,  sum lambda = 1   |
| exit       | s, lambda, slack     | s u - sum lambda v = -x, sum lambda + slack = 1 |

Functions:
    VertexPolytope(generators):      Immutable symmetric polytope
    EuclideanBall(radius, n):        r B_2^n with the same oracle surface
    random_polytope(dist, N, rng):   K_N from N i.i.d. draws
    support / support_many:          h_K, exact
    gauge / gauge_many:              ||y||_K
    radial / radial_many:            r_K(theta) = 1 / ||theta||_K
    contains / contains_many:        ||y||_K <= 1 + tol
    exit_distance(K, x, u):          max s >= 0 with x + s u in K
    facets(K, cap):                  FacetSimplex list (beneath-beyond)
    facet_enumeration(K, cap):       facets plus the perturbation flag
    facet_arrays(K):                 stacked facet normals and offsets (cached)
    volume_exact(K):                 sum of offset * area / n over facets
    volume_mc(K, samples, rng):      rejection estimate in R(K) B_2^n
    scaled / linear_image / with_generators: derived polytopes
    read_point_cloud / write_point_cloud:    text import/export
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from randpoly.errors import (
    CapExceeded,
    Coplanar,
    DegenerateInput,
    DimensionMismatch,
    LowAcceptance,
    NumericalBreakdown,
)
from randpoly.geometry import as_unit_vector, log_unit_ball_volume, sample_sphere_many
from randpoly.hull import IncrementalHull, facet_area
from randpoly.lp import DEFAULT_TOL, Infeasible, Optimal, SimplexSolver, StandardFormLP
from randpoly.measures import Distribution, Estimate, sample
from utils.io_utils import read_points, write_points
from utils.rng_utils import as_stream

log = logging.getLogger(__name__)

FACET_CAP = 8
FACET_GAUGE_MAX_N = 6
PILOT_DIRECTIONS = 200
MIN_ACCEPTANCE = 1e-6
JITTER = 1e-9


@dataclass(frozen=True)
class FacetSimplex:
    """
    One facet of K: n signed generators on the hyperplane <normal, .> = offset.

    `vertices` holds the signed vertex coordinates row-wise (the matrix whose
    columns are the facet's vertices, transposed).
    """
    indices: Tuple[int, ...]
    signs: Tuple[int, ...]
    normal: np.ndarray
    offset: float
    vertices: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def area(self) -> float:
        return facet_area(self.vertices)


@dataclass(frozen=True)
class FacetEnumeration:
    facets: Tuple[FacetSimplex, ...]
    perturbed: bool

    @property
    def count(self) -> int:
        return len(self.facets)


@dataclass(frozen=True, eq=False)
class VertexPolytope:
    """conv{+-x_j}; `generators` is N x n, signed copies never stored."""
    generators: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        gens = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if gens.ndim != 2 or gens.shape[0] < 1 or gens.shape[1] < 1:
            raise ValueError("need at least one generator")
        if not np.all(np.isfinite(gens)):
            raise ValueError("generators must be finite")
        gens.setflags(write=False)
        object.__setattr__(self, "generators", gens)

    @property
    def n(self) -> int:
        return self.generators.shape[1]

    @property
    def N(self) -> int:
        return self.generators.shape[0]

    @property
    def signed_points(self) -> np.ndarray:
        return np.vstack([self.generators, -self.generators])

    @property
    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.generators, axis=1)))

    @property
    def scale(self) -> float:
        return self.radius or 1.0


@dataclass(frozen=True)
class EuclideanBall:
    """radius * B_2^n."""
    radius: float
    n: int

    def __post_init__(self):
        if self.radius <= 0 or self.n < 1:
            raise ValueError("ball needs radius > 0 and n >= 1")

    def support_many(self, thetas) -> np.ndarray:
        return self.radius * np.linalg.norm(np.atleast_2d(thetas), axis=1)

    def gauge_many(self, points) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(points), axis=1) / self.radius

    def radial_many(self, thetas) -> np.ndarray:
        return np.full(len(np.atleast_2d(thetas)), float(self.radius))

    def volume(self) -> float:
        return float(np.exp(log_unit_ball_volume(self.n) + self.n * np.log(self.radius)))


Body = Union[VertexPolytope, EuclideanBall]


def random_polytope(dist: Distribution, N: int, rng=None) -> VertexPolytope:
    """K_N = conv{+-x_1..x_N} with x_j i.i.d. from dist."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return VertexPolytope(sample(dist, N, rng))


def _check_dim(K: Body, points: np.ndarray):
    if points.shape[-1] != K.n:
        raise DimensionMismatch(f"dimension {points.shape[-1]} does not match n={K.n}")


# -- support ---------------------------------------------------------------

def support_many(K: Body, thetas) -> np.ndarray:
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    _check_dim(K, thetas)
    if isinstance(K, EuclideanBall):
        return K.support_many(thetas)
    return np.max(np.abs(thetas @ K.generators.T), axis=1)


def support(K: Body, theta) -> float:
    return float(support_many(K, theta)[0])


# -- gauge ------------------------------------------------------------------

def _use_facets(K: VertexPolytope, method: str) -> bool:
    if method not in ("auto", "lp", "facets"):
        raise ValueError(f"unknown oracle method {method!r}")
    if method == "lp":
        return False
    if method == "facets":
        return True
    if K.n > FACET_GAUGE_MAX_N or K._cache.get("facets_failed"):
        return False
    try:
        facet_enumeration(K)
    except DegenerateInput:
        K._cache["facets_failed"] = True
        return False
    return True


def facet_oracle_available(K: VertexPolytope) -> bool:
    """True when "auto" queries on K are answered from the facet list."""
    return _use_facets(K, "auto")


def facet_arrays(K: VertexPolytope):
    arrays = K._cache.get("facet_arrays")
    if arrays is None:
        fl = facets(K)
        arrays = (np.array([f.normal for f in fl]), np.array([f.offset for f in fl]))
        K._cache["facet_arrays"] = arrays
    return arrays


def _gauge_lp(K: VertexPolytope, y: np.ndarray, tol: float) -> float:
    norm = float(np.linalg.norm(y))
    if norm == 0.0:
        return 0.0
    u = y / norm
    signed = K.signed_points / K.scale
    n, m = K.n, signed.shape[0]
    cols = max(1 + m, n + 1)
    A = np.zeros((n + 1, cols))
    A[:n, 0] = u
    A[:n, 1:1 + m] = -signed.T
    A[n, 1:1 + m] = 1.0
    b = np.zeros(n + 1)
    b[n] = 1.0
    c = np.zeros(cols)
    c[0] = 1.0
    result = SimplexSolver(tol=tol).solve(StandardFormLP(A, b, c))
    if isinstance(result, Infeasible):
        return float("inf")
    if not isinstance(result, Optimal):
        raise NumericalBreakdown("gauge LP unbounded for a nonzero query")
    t = result.value
    if t <= tol:
        return float("inf")
    return norm / (t * K.scale)


def gauge_many(K: Body, points, tol: float = DEFAULT_TOL, method: str = "auto") -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_dim(K, points)
    if isinstance(K, EuclideanBall):
        return K.gauge_many(points)
    if _use_facets(K, method):
        normals, offsets = facet_arrays(K)
        return np.maximum(np.max((points @ normals.T) / offsets, axis=1), 0.0)
    return np.array([_gauge_lp(K, y, tol) for y in points])


def gauge(K: Body, y, tol: float = DEFAULT_TOL, method: str = "auto") -> float:
    """Minkowski functional ||y||_K; +inf off the span of the generators."""
    return float(gauge_many(K, y, tol, method)[0])


def radial_many(K: Body, thetas, tol: float = DEFAULT_TOL, method: str = "auto") -> np.ndarray:
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    norms = np.linalg.norm(thetas, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("radial directions must be unit vectors")
    if isinstance(K, EuclideanBall):
        return K.radial_many(thetas)
    g = gauge_many(K, thetas, tol, method)
    with np.errstate(divide="ignore"):
        return np.where(g > 0, 1.0 / g, np.inf)


def radial(K: Body, theta, tol: float = DEFAULT_TOL, method: str = "auto") -> float:
    theta = as_unit_vector(theta)
    return float(radial_many(K, theta, tol, method)[0])


def contains_many(K: Body, points, tol: float = DEFAULT_TOL, method: str = "auto") -> np.ndarray:
    return gauge_many(K, points, tol, method) <= 1.0 + tol


def contains(K: Body, y, tol: float = DEFAULT_TOL, method: str = "auto") -> bool:
    return bool(contains_many(K, y, tol, method)[0])


def exit_distance(K: VertexPolytope, x, u, tol: float = DEFAULT_TOL,
                  method: str = "auto") -> float:
    """Largest s >= 0 with x + s u in K (x assumed in K)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    _check_dim(K, x)
    _check_dim(K, u)
    if _use_facets(K, method):
        normals, offsets = facet_arrays(K)
        rate = normals @ u
        slack = offsets - normals @ x
        moving = rate > 1e-15
        if not np.any(moving):
            return float("inf")
        return float(max(np.min(slack[moving] / rate[moving]), 0.0))

    scale = K.scale
    signed = K.signed_points / scale
    n, m = K.n, signed.shape[0]
    cols = max(m + 2, n + 1)
    A = np.zeros((n + 1, cols))
    A[:n, 0] = u
    A[:n, 1:1 + m] = -signed.T
    A[n, 1:1 + m] = 1.0
    A[n, 1 + m] = 1.0
    b = np.concatenate([-x / scale, [1.0]])
    c = np.zeros(cols)
    c[0] = 1.0
    result = SimplexSolver(tol=tol).solve(StandardFormLP(A, b, c))
    if isinstance(result, Infeasible):
        log.debug("exit_distance: start point outside K")
        return 0.0
    if not isinstance(result, Optimal):
        return float("inf")
    return result.value * scale


# -- facets -----------------------------------------------------------------

def _unique_up_to_sign(gens: np.ndarray):
    """Canonical sign (first nonzero coordinate positive), zero rows dropped."""
    keep, index = [], []
    seen = set()
    for j, row in enumerate(gens):
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        canon = row if row[nz[0]] > 0 else -row
        key = canon.tobytes()
        if key in seen:
            continue
        seen.add(key)
        keep.append(row)
        index.append(j)
    if not keep:
        raise DegenerateInput("all generators are zero")
    return np.array(keep), np.array(index)


def _jitter(gens: np.ndarray, scale: float) -> np.ndarray:
    """Deterministic per-coordinate jitter of size 1e-9 * scale."""
    rows, cols = gens.shape
    j = np.arange(1, rows + 1)[:, None]
    i = np.arange(1, cols + 1)[None, :]
    pattern = np.mod(j * 0.6180339887498949 + i * 0.4142135623730951, 1.0) - 0.5
    return gens + JITTER * scale * pattern


def _enumerate(gens: np.ndarray, index: np.ndarray) -> List[FacetSimplex]:
    m = gens.shape[0]
    points = np.vstack([gens, -gens])
    hull = IncrementalHull(points)
    out = []
    for hf in hull.facets():
        idx = tuple(int(index[v % m]) for v in hf.vertices)
        signs = tuple(1 if v < m else -1 for v in hf.vertices)
        if hf.offset <= 0:
            raise DegenerateInput("origin is not interior to the hull")
        out.append(FacetSimplex(idx, signs, hf.normal, hf.offset, points[list(hf.vertices)]))
    return out


def facet_enumeration(K: VertexPolytope, cap: int = FACET_CAP) -> FacetEnumeration:
    if K.n > cap:
        raise CapExceeded(f"n={K.n} exceeds the facet enumeration cap {cap}")
    cached = K._cache.get("facets")
    if cached is not None:
        return cached
    gens, index = _unique_up_to_sign(K.generators)
    if gens.shape[0] < K.n:
        raise DegenerateInput(f"{gens.shape[0]} distinct generators cannot span R^{K.n}")
    try:
        result = FacetEnumeration(tuple(_enumerate(gens, index)), False)
    except Coplanar as exc:
        log.debug("hull hit a coplanarity (%s); retrying with jitter", exc)
        try:
            result = FacetEnumeration(tuple(_enumerate(_jitter(gens, K.scale), index)), True)
        except Coplanar as again:
            raise DegenerateInput(f"still coplanar after perturbation: {again}") from again
        log.warning("facet enumeration perturbed generators by %.1e * scale", JITTER)
    K._cache["facets"] = result
    return result


def facets(K: VertexPolytope, cap: int = FACET_CAP) -> List[FacetSimplex]:
    return list(facet_enumeration(K, cap).facets)


def volume_exact(K: VertexPolytope, cap: int = FACET_CAP) -> float:
    fl = facets(K, cap)
    return float(sum(f.offset * f.area for f in fl) / K.n)


def volume_mc(K: VertexPolytope, samples: int, rng=None) -> Estimate:
    """Rejection estimate of |K| from uniform draws in R(K) B_2^n."""
    if samples < 1000:
        raise ValueError("volume_mc needs at least 1000 samples")
    stream = as_stream(rng)
    n, R = K.n, K.radius
    # Expected acceptance is E_theta (r(theta)/R)^n.
    pilot = sample_sphere_many(n, PILOT_DIRECTIONS, stream.child("pilot"))
    acceptance = float(np.mean((radial_many(K, pilot) / R) ** n))
    if acceptance < MIN_ACCEPTANCE:
        raise LowAcceptance(f"pilot acceptance {acceptance:.2e} in n={n}; use bounds instead")
    draws = stream.child("draws")
    dirs = sample_sphere_many(n, samples, draws)
    radii = R * draws.generator.random(samples) ** (1.0 / n)
    hits = contains_many(K, dirs * radii[:, None])
    p = float(np.mean(hits))
    ball = float(np.exp(log_unit_ball_volume(n) + n * np.log(R)))
    se = ball * np.sqrt(p * (1.0 - p) / samples)
    return Estimate(ball * p, float(se), samples, stream.provenance)


# -- constructors -----------------------------------------------------------

def scaled(K: VertexPolytope, s: float) -> VertexPolytope:
    return VertexPolytope(s * K.generators)


def linear_image(K: VertexPolytope, T) -> VertexPolytope:
    T = np.asarray(T, dtype=float)
    if T.shape[1] != K.n:
        raise DimensionMismatch(f"map has {T.shape[1]} columns, body has n={K.n}")
    return VertexPolytope(K.generators @ T.T)


def with_generators(K: VertexPolytope, extra) -> VertexPolytope:
    extra = np.atleast_2d(np.asarray(extra, dtype=float))
    _check_dim(K, extra)
    return VertexPolytope(np.vstack([K.generators, extra]))


def cross_polytope(n: int) -> VertexPolytope:
    return VertexPolytope(np.eye(n))


def cube_polytope(n: int, half_side: float = 1.0) -> VertexPolytope:
    """[-a, a]^n as a vertex polytope (one generator per antipodal pair)."""
    corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    return VertexPolytope(half_side * corners[corners[:, 0] > 0])


def write_point_cloud(path, K: VertexPolytope, seed: int = 0):
    write_points(path, K.generators, seed)


def read_point_cloud(path) -> Tuple[VertexPolytope, int]:
    points, seed = read_points(path)
    return VertexPolytope(points), seed
