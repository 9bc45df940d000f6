"""
Covering numbers and entropy envelopes

N(A, tB) is estimated with a farthest-point traversal of a finite pool of
points of A under the gauge of B. The traversal order does not depend on t:
the count for a given t is the shortest prefix whose covering radius over
the pool is <= t, so one traversal answers a whole t-grid and the counts are
nonincreasing in t by construction. The prefix is a t-net of the pool (an
estimate of N(A, tB)); when the pool is itself a t-net of A the prefix also
bounds N(A, 2tB) from above. Whether a fresh validation sample of A lies
within 2t of the centers is recorded as `pool_covered`.

Gauge distances to a polytope B use the facet list when it is available
and otherwise LPs, pruned by a support-function lower bound: a pair whose
lower bound already exceeds the current nearest-center distance is never
solved.

Functions:
    boundary_pool(A, budget, rng):           radial boundary points + generators
    covering_pool(A, budget, rng):           boundary points plus interior fill
    farthest_point_traversal(pool, B, stop): order and covering radii
    covering_upper(A, B, t, budget, rng):    CoveringNet for one t
    sudakov_envelope(w, n, t):               n (w/t)^2
    dual_entropy_envelope(n, q, t):          n (log q)^2 log(1+t)/t
    regularity_envelope(n, t):               n (log n)^2 log(1+t)/t
    small_scale_envelope(n, t) / large_scale_envelope(n, t)
    regularity_profile(K, t_grid, budgets, rng): (primal, dual) CoveringReports
    section_lower_bound_check(K, k, frames, directions, rng)
    section_upper_envelope(N, n, k)
    containment_quantiles(K, d, frames, directions, rng, quantiles)
    fitted_constant(values, envelopes)

CSV rows (one per direction and t):

| Column       | Meaning                                         |
|--------------|-------------------------------------------------|
| direction    | "primal" N(K, t r B) or "dual" N(r B, t K)      |
| t            | scale                                           |
| greedy_count | log of the greedy net size                      |
| lower_bound  | log(|A| / |tB|) when both volumes are known     |
| envelope     | regularity envelope at t                        |
| fitted_c     | greedy_count / envelope                         |
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from randpoly.errors import DegenerateInput
from randpoly.functionals import section_radius
from randpoly.geometry import sample_frame, sample_sphere_many
from randpoly.polytope import (
    Body,
    EuclideanBall,
    VertexPolytope,
    facet_oracle_available,
    gauge_many,
    radial_many,
    support_many,
    volume_exact,
)
from utils.rng_utils import Stream, as_stream

log = logging.getLogger(__name__)

POOL_SIZE = 4096
VALIDATION_SIZE = 256
PROBES = 64
RADIUS_SLACK = 1.0 + 1e-9


@dataclass(frozen=True)
class CoveringNet:
    t: float
    size: int
    pool_size: int
    pool_covered: bool
    centers: np.ndarray = field(repr=False)

    @property
    def log_size(self) -> float:
        return float(np.log(self.size))


@dataclass(frozen=True)
class CoveringReport:
    direction: str
    t_grid: np.ndarray
    counts: np.ndarray
    upper: np.ndarray
    lower: Optional[np.ndarray]
    envelope: np.ndarray
    pool_covered: bool

    def __post_init__(self):
        if self.lower is not None and np.any(self.upper < self.lower - 1e-12):
            log.warning("%s covering: greedy count below the volumetric bound", self.direction)

    @property
    def fitted_c(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.envelope > 0, self.upper / self.envelope, 0.0)


# -- pools ------------------------------------------------------------------

def _radial_points(A: Body, count: int, stream: Stream) -> np.ndarray:
    dirs = sample_sphere_many(A.n, count, stream)
    return dirs * radial_many(A, dirs)[:, None]


def boundary_pool(A: Body, budget: int = POOL_SIZE, rng=None) -> np.ndarray:
    """r_A(u) u for Haar u, preceded by the signed generators of A."""
    stream = as_stream(rng)
    points = _radial_points(A, budget, stream.child("boundary"))
    if isinstance(A, VertexPolytope):
        points = np.vstack([A.signed_points, points])
    return points


def covering_pool(A: Body, budget: int = POOL_SIZE, rng=None, fill: float = 0.5) -> np.ndarray:
    """
    Pool for covering A itself: the boundary pool plus interior points
    U^{1/n} r_A(u) u, so the net has to cover the inside as well.
    """
    stream = as_stream(rng)
    inner = int(budget * fill)
    boundary = boundary_pool(A, budget - inner, stream)
    origin = np.zeros((1, A.n))
    fill_stream = stream.child("interior")
    interior = _radial_points(A, inner, fill_stream)
    interior *= (fill_stream.generator.random(inner) ** (1.0 / A.n))[:, None]
    return np.vstack([origin, boundary, interior])


# -- gauge metric -----------------------------------------------------------

class _GaugeMetric:
    """Distances ||x - c||_B with cheap lower bounds for LP-backed bodies."""

    def __init__(self, B: Body):
        self.B = B
        self.vectorized = isinstance(B, EuclideanBall) or facet_oracle_available(B)
        if not self.vectorized:
            probes = np.vstack([np.eye(B.n),
                                sample_sphere_many(B.n, PROBES, Stream(0).child("probes", B.n))])
            self.probes = probes
            self.probe_support = support_many(B, probes)
        self.solved = 0

    def lower(self, Z: np.ndarray) -> np.ndarray:
        return np.max(np.abs(Z @ self.probes.T) / self.probe_support, axis=1)

    def to(self, points: np.ndarray, center: np.ndarray, cutoff: np.ndarray) -> np.ndarray:
        Z = points - center
        if self.vectorized:
            return gauge_many(self.B, Z)
        d = self.lower(Z)
        need = np.flatnonzero(d < cutoff)
        if need.size:
            d[need] = gauge_many(self.B, Z[need], method="lp")
            self.solved += need.size
        return d


def farthest_point_traversal(pool: np.ndarray, B: Body, stop_radius: float,
                             max_centers: Optional[int] = None):
    """
    Greedy farthest-point order on `pool` under ||.||_B.

    Returns (order, radii): radii[i] is the covering radius of the pool by
    the first i+1 centers. Stops once the radius is <= stop_radius.
    """
    metric = _GaugeMetric(B)
    m = pool.shape[0]
    nearest = np.full(m, np.inf)
    order: List[int] = []
    radii: List[float] = []
    current = 0
    limit = max_centers or m
    while len(order) < limit:
        order.append(current)
        d = metric.to(pool, pool[current], nearest)
        nearest = np.minimum(nearest, d)
        current = int(np.argmax(nearest))
        radii.append(float(nearest[current]))
        if radii[-1] <= stop_radius * RADIUS_SLACK:
            break
    log.debug("traversal: %d centers, %d LP gauges", len(order), metric.solved)
    return np.array(order), np.array(radii)


def _count_for(radii: np.ndarray, t: float) -> int:
    hit = np.flatnonzero(radii <= t * RADIUS_SLACK)
    return int(hit[0]) + 1 if hit.size else len(radii)


def _validate(A: Body, B: Body, centers: np.ndarray, t: float, stream: Stream) -> bool:
    check = covering_pool(A, VALIDATION_SIZE, stream)
    metric = _GaugeMetric(B)
    nearest = np.full(len(check), np.inf)
    for c in centers:
        nearest = np.minimum(nearest, metric.to(check, c, nearest))
    return bool(np.all(nearest <= 2.0 * t * RADIUS_SLACK))


def covering_upper(A: Body, B: Body, t: float, budget: int = POOL_SIZE, rng=None,
                   pool: Optional[np.ndarray] = None) -> CoveringNet:
    """Greedy t-net of a pool of A under ||.||_B."""
    if t <= 0:
        raise ValueError("t must be positive")
    stream = as_stream(rng)
    if pool is None:
        pool = covering_pool(A, budget, stream.child("pool"))
    order, radii = farthest_point_traversal(pool, B, t)
    size = _count_for(radii, t)
    centers = pool[order[:size]]
    covered = _validate(A, B, centers, t, stream.child("validation"))
    if not covered:
        log.warning("covering net at t=%g does not cover a fresh sample; pool budget too small", t)
    return CoveringNet(float(t), size, pool.shape[0], covered, centers)


# -- envelopes --------------------------------------------------------------

def sudakov_envelope(w: float, n: int, t: float) -> float:
    return float(n * (w / t) ** 2)


def dual_entropy_envelope(n: int, q: float, t: float) -> float:
    return float(n * np.log(q) ** 2 * np.log1p(t) / t)


def regularity_envelope(n: int, t: float) -> float:
    return float(n * np.log(n) ** 2 * np.log1p(t) / t)


def small_scale_envelope(n: int, t: float) -> float:
    return float(n / t ** 2)


def large_scale_envelope(n: int, t: float) -> float:
    return float(n * np.log(n) ** 4 / t ** 2)


def section_upper_envelope(N: int, n: int, k: int) -> float:
    """sqrt(log N) sqrt(n/(n-k)) log(n/(n-k)), for k < n."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    ratio = n / (n - k)
    return float(np.sqrt(np.log(N)) * np.sqrt(ratio) * np.log(ratio))


def fitted_constant(values: Sequence[float], envelopes: Sequence[float]) -> float:
    """Single constant c = max values / envelopes over positive envelopes."""
    values = np.asarray(values, dtype=float)
    envelopes = np.asarray(envelopes, dtype=float)
    mask = envelopes > 0
    if not np.any(mask):
        raise ValueError("no positive envelope values")
    return float(np.max(values[mask] / envelopes[mask]))


# -- profiles ---------------------------------------------------------------

def _volume_or_none(A: Body) -> Optional[float]:
    if isinstance(A, EuclideanBall):
        return A.volume()
    if A.n > 6:
        return None
    try:
        return volume_exact(A)
    except DegenerateInput:
        return None


def _report(direction: str, A: Body, B: Body, t_grid: np.ndarray, budget: int,
            stream: Stream) -> CoveringReport:
    pool = covering_pool(A, budget, stream.child("pool"))
    order, radii = farthest_point_traversal(pool, B, float(np.min(t_grid)))
    counts = np.array([_count_for(radii, t) for t in t_grid])
    vol_a, vol_b = _volume_or_none(A), _volume_or_none(B)
    lower = None
    if vol_a is not None and vol_b is not None:
        lower = np.log(vol_a) - np.log(vol_b) - A.n * np.log(t_grid)
    n = A.n
    envelope = np.array([regularity_envelope(n, t) for t in t_grid])
    smallest = counts[np.argmin(t_grid)]
    covered = _validate(A, B, pool[order[:smallest]], float(np.min(t_grid)),
                        stream.child("validation"))
    return CoveringReport(direction, t_grid, counts, np.log(counts), lower, envelope, covered)


def regularity_profile(K: VertexPolytope, t_grid: Sequence[float],
                       budgets: Optional[Dict[str, int]] = None, rng=None):
    """
    Greedy log N(K, t r_N B) and log N(r_N B, t K) on a t-grid, r_N = sqrt(log N),
    paired with the n (log n)^2 log(1+t)/t envelope.
    """
    budgets = budgets or {}
    pool = int(budgets.get("pool", POOL_SIZE))
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t-grid must be positive")
    stream = as_stream(rng)
    r_n = float(np.sqrt(np.log(max(K.N, 2))))
    ball = EuclideanBall(r_n, K.n)
    primal = _report("primal", K, ball, t_grid, pool, stream.child("primal"))
    dual = _report("dual", ball, K, t_grid, pool, stream.child("dual"))
    return primal, dual


# -- sections ---------------------------------------------------------------

@dataclass(frozen=True)
class SectionCheck:
    k: int
    radii: np.ndarray
    envelope: float

    @property
    def ratios(self) -> np.ndarray:
        return self.radii / self.envelope

    @property
    def min_ratio(self) -> float:
        return float(np.min(self.ratios))


def section_lower_envelope(N: int, n: int, k: int) -> float:
    """sqrt(log N) k / (n log^3 n)."""
    return float(np.sqrt(np.log(N)) * k / (n * np.log(n) ** 3))


def _frame_section_radii(K: VertexPolytope, rank: int, frames: int, directions: int,
                         stream: Stream) -> np.ndarray:
    out = np.empty(frames)
    for i in range(frames):
        fs = stream.child("frame", i)
        out[i] = section_radius(K, sample_frame(K.n, rank, fs), directions, fs).value
    return out


def section_lower_bound_check(K: VertexPolytope, k: int, frames: int = 50,
                              directions: int = 500, rng=None) -> SectionCheck:
    if K.n < 2:
        raise ValueError("section check needs n >= 2")
    radii = _frame_section_radii(K, k, frames, directions, as_stream(rng))
    return SectionCheck(k, radii, section_lower_envelope(max(K.N, 2), K.n, k))


def containment_quantiles(K: VertexPolytope, d: int, frames: int = 50, directions: int = 500,
                          rng=None, quantiles: Sequence[float] = (0.5, 0.9)) -> Dict[float, float]:
    """Quantiles of R(K cap H^perp) over Haar H in G_{n,d}."""
    if not 0 < d < K.n:
        raise ValueError("need 0 < d < n")
    radii = _frame_section_radii(K, K.n - d, frames, directions, as_stream(rng))
    return {float(q): float(np.quantile(radii, q)) for q in quantiles}

