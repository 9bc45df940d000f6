"""
Isotropic constants of symmetric polytopes and the facet bound chain

Second moments of the uniform measure on K come from one of three paths:

    exact        cone every facet to the origin and integrate each solid
                 simplex in closed form
    rejection    uniform draws in R(K) B_2^n kept when inside K
    hit-and-run  8 chains of chord moves, burn-in 10 n^2, thinning n,
                 split-chain R-hat on |x|^2

The bound chain compares, for one polytope,

    (i)   (1/|K|) int_K |x|^2
    (ii)  n/(n+2) max_F (1/|F|) int_F |u|^2          (facet bound)
    (iii) n/(n+2) max_F 2/(n(n+1)) max_eps |sum eps_j y_j|^2   (sign bound)

and turns each into an upper bound on L_K through
|K|^{2/n} n L_K^2 <= (1/|K|) int_K |x|^2.

Functions:
    simplex_moments(vertices):              volume, int x, int x x^T
    body_moments(K, mode, samples, rng):    BodyMoments
    isotropic_constant(K, moments):         |K|^{-1/n} det(Cov)^{1/(2n)}
    facet_second_moment(F):                 closed form over a facet simplex
    facet_second_moment_mc(F, samples, rng) Dirichlet MC of the same
    dirichlet_second_moments(n, samples, rng)
    max_facet_bound(K):                     (ii)
    max_signed_sum(Y, rng, exhaustive_limit)
    sign_max_bound(F, rng):                 2/(n(n+1)) max_eps |sum eps y|^2
    marginal_sums(dist, a, samples, rng):   sum a_j <x_j, theta>, x_j independent
    bernstein_check(dist, a, A, t_grid, samples, rng)
    kk_bound_pipeline(K, samples, rng):     KKReport

Report fields:

| Field              | Meaning                                        |
|--------------------|------------------------------------------------|
| interior           | (i)                                            |
| facet_bound        | (ii), None without facets                      |
| sign_bound         | (iii), None without facets                     |
| volume_radius      | |K|^{1/n}                                      |
| l_bound_*          | sqrt(bound / (n |K|^{2/n})) for (i)-(iii)      |
| isotropic_constant | L_K computed directly                          |
"""
import logging
from dataclasses import dataclass
from math import comb, factorial
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from randpoly.errors import CapExceeded, DegenerateInput, LowAcceptance, SingularFacet
from randpoly.geometry import log_unit_ball_volume, sample_sphere_many
from randpoly.measures import Distribution, sample
from randpoly.polytope import (
    FACET_CAP,
    FacetSimplex,
    VertexPolytope,
    contains_many,
    exit_distance,
    facet_enumeration,
    facet_oracle_available,
    radial_many,
    volume_exact,
    volume_mc,
    facet_arrays,
)
from utils.rng_utils import Stream, as_stream

log = logging.getLogger(__name__)

CHAINS = 8
RHAT_LIMIT = 1.1
SIGN_EXHAUSTIVE = 20
SIGN_RESTARTS = 64
CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class BodyMoments:
    """Moments of the uniform probability on K."""
    volume: Optional[float]
    center: np.ndarray
    second_moment: np.ndarray
    provenance: str
    trace_se: float = 0.0
    rhat: float = 1.0
    converged: bool = True
    samples: int = 0

    def __post_init__(self):
        sm = self.second_moment
        if sm.shape[0] != sm.shape[1] or np.max(np.abs(sm - sm.T)) > 1e-9 * max(1.0, np.max(np.abs(sm))):
            raise ValueError("second-moment matrix must be symmetric")

    @property
    def n(self) -> int:
        return self.center.size

    @property
    def covariance(self) -> np.ndarray:
        return self.second_moment - np.outer(self.center, self.center)

    @property
    def trace(self) -> float:
        """(1/|K|) int |x|^2."""
        return float(np.trace(self.second_moment))


# -- exact path -------------------------------------------------------------

def simplex_moments(vertices) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Volume, int x dx and int x x^T dx over the solid simplex with the given
    n+1 vertices (rows).
    """
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    n = v.shape[1]
    if v.shape[0] != n + 1:
        raise ValueError(f"need n+1 = {n + 1} vertices, got {v.shape[0]}")
    vol = abs(np.linalg.det(v[1:] - v[0])) / factorial(n)
    s = v.sum(axis=0)
    first = vol * s / (n + 1)
    second = vol / ((n + 1) * (n + 2)) * (v.T @ v + np.outer(s, s))
    return float(vol), first, second


def _exact_moments(K: VertexPolytope, cap: int) -> BodyMoments:
    enum = facet_enumeration(K, cap)
    n = K.n
    origin = np.zeros((1, n))
    vol, first, second = 0.0, np.zeros(n), np.zeros((n, n))
    for f in enum.facets:
        dv, df, ds = simplex_moments(np.vstack([origin, f.vertices]))
        vol += dv
        first += df
        second += ds
    second = 0.5 * (second + second.T)
    return BodyMoments(vol, first / vol, second / vol, "exact", samples=0)


# -- Monte-Carlo paths ------------------------------------------------------

def _rejection_moments(K: VertexPolytope, samples: int, stream: Stream) -> BodyMoments:
    n, R = K.n, K.radius
    pilot = sample_sphere_many(n, 200, stream.child("pilot"))
    acceptance = float(np.mean((radial_many(K, pilot) / R) ** n))
    if acceptance < 1e-6:
        raise LowAcceptance(f"pilot acceptance {acceptance:.2e}; use hit-and-run")
    draws = stream.child("draws")
    kept: List[np.ndarray] = []
    accepted, total = 0, 0
    batch = max(1000, int(2 * samples / max(acceptance, 1e-3)))
    while accepted < samples:
        dirs = sample_sphere_many(n, batch, draws)
        pts = dirs * (R * draws.generator.random(batch) ** (1.0 / n))[:, None]
        inside = pts[contains_many(K, pts)]
        kept.append(inside)
        accepted += len(inside)
        total += batch
    X = np.vstack(kept)[:samples]
    # total draws are counted up to the batch that reached the target
    ball = float(np.exp(log_unit_ball_volume(n) + n * np.log(R)))
    vol = ball * accepted / total
    sq = np.sum(X ** 2, axis=1)
    return BodyMoments(vol, X.mean(axis=0), X.T @ X / len(X), "rejection",
                       trace_se=float(sq.std(ddof=1) / np.sqrt(len(X))), samples=len(X))


def _chords(K: VertexPolytope, X: np.ndarray, U: np.ndarray):
    """Forward and backward exit distances from each row of X along U."""
    if facet_oracle_available(K):
        normals, offsets = facet_arrays(K)
        rate = U @ normals.T
        slack = np.maximum(offsets - X @ normals.T, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            fwd = np.where(rate > 1e-15, slack / rate, np.inf).min(axis=1)
            bwd = np.where(rate < -1e-15, slack / -rate, np.inf).min(axis=1)
        return fwd, bwd
    fwd = np.array([exit_distance(K, x, u, method="lp") for x, u in zip(X, U)])
    bwd = np.array([exit_distance(K, x, -u, method="lp") for x, u in zip(X, U)])
    return fwd, bwd


def split_rhat(chains: np.ndarray) -> float:
    """Split-chain potential scale reduction on a (chains, draws) array."""
    half = chains.shape[1] // 2
    if half < 2:
        return float("inf")
    parts = np.vstack([chains[:, :half], chains[:, half:2 * half]])
    L = parts.shape[1]
    within = parts.var(axis=1, ddof=1).mean()
    between = L * parts.mean(axis=1).var(ddof=1)
    if within == 0:
        return 1.0
    return float(np.sqrt(((L - 1) / L * within + between / L) / within))


def _batch_means_se(series: np.ndarray) -> float:
    m = series.size
    size = max(1, int(np.sqrt(m)))
    count = m // size
    if count < 2:
        return 0.0
    means = series[:count * size].reshape(count, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(count))


def _hit_and_run(K: VertexPolytope, samples: int, stream: Stream,
                 chains: int = CHAINS) -> BodyMoments:
    n = K.n
    burn_in, thin = 10 * n * n, n
    per_chain = max(4, -(-samples // chains))
    gens = [stream.child("chain", c) for c in range(chains)]
    X = np.zeros((chains, n))
    draws = np.empty((chains, per_chain, n))
    for step in range(burn_in + per_chain * thin):
        U = np.vstack([sample_sphere_many(n, 1, g) for g in gens])
        fwd, bwd = _chords(K, X, U)
        fwd, bwd = np.minimum(fwd, 1e300), np.minimum(bwd, 1e300)
        shift = np.array([g.generator.uniform(-b, f) for g, f, b in zip(gens, fwd, bwd)])
        X = X + shift[:, None] * U
        kept = step - burn_in
        if kept >= 0 and (kept + 1) % thin == 0:
            draws[:, kept // thin] = X
    sq = np.sum(draws ** 2, axis=2)
    rhat = split_rhat(sq)
    converged = rhat <= RHAT_LIMIT
    if not converged:
        log.warning("hit-and-run did not converge: split R-hat %.3f > %.2f", rhat, RHAT_LIMIT)
    flat = draws.reshape(-1, n)
    se = float(np.sqrt(np.mean([_batch_means_se(s) ** 2 for s in sq]) / chains))
    volume = None
    try:
        volume = _volume(K, stream.child("volume"))
    except LowAcceptance as exc:
        log.warning("no volume for hit-and-run moments: %s", exc)
    return BodyMoments(volume, flat.mean(axis=0), flat.T @ flat / len(flat), "hit-and-run",
                       trace_se=se, rhat=rhat, converged=converged, samples=len(flat))


def _volume(K: VertexPolytope, stream: Stream) -> float:
    if facet_oracle_available(K):
        return volume_exact(K)
    return volume_mc(K, 100_000, stream).value


def body_moments(K: VertexPolytope, mode: str = "exact", samples: int = 20_000, rng=None,
                 cap: int = FACET_CAP) -> BodyMoments:
    """Moments of the uniform probability on K; mode exact | rejection | hit-and-run."""
    stream = as_stream(rng)
    if mode == "exact":
        return _exact_moments(K, cap)
    if mode == "rejection":
        return _rejection_moments(K, samples, stream)
    if mode == "hit-and-run":
        return _hit_and_run(K, samples, stream)
    raise ValueError(f"unknown moments mode {mode!r}")


def isotropic_constant(K: VertexPolytope, moments: Optional[BodyMoments] = None) -> float:
    """L_K = |K|^{-1/n} det(Cov)^{1/(2n)}; exact moments when none are given."""
    moments = moments or body_moments(K, "exact")
    if moments.volume is None:
        raise DegenerateInput("moments carry no volume")
    n = moments.n
    sign, logdet = np.linalg.slogdet(moments.covariance)
    if sign <= 0:
        raise DegenerateInput("covariance is not positive definite")
    return float(np.exp(-np.log(moments.volume) / n + logdet / (2 * n)))


# -- facet formulas ---------------------------------------------------------

FacetLike = Union[FacetSimplex, np.ndarray]


def _facet_matrix(F: FacetLike) -> np.ndarray:
    Y = F.vertices if isinstance(F, FacetSimplex) else np.atleast_2d(np.asarray(F, dtype=float))
    return Y


def facet_second_moment(F: FacetLike) -> float:
    """(1/|F|) int_F |u|^2 = (sum_j |y_j|^2 + |sum_j y_j|^2) / (n(n+1))."""
    Y = _facet_matrix(F)
    n = Y.shape[0]
    if Y.shape[1] == n:
        scale = max(1.0, np.max(np.abs(Y))) ** n
        if abs(np.linalg.det(Y)) <= 1e-12 * scale:
            raise SingularFacet("facet vertex matrix is singular")
    s = Y.sum(axis=0)
    return float((np.sum(Y ** 2) + s @ s) / (n * (n + 1)))


def dirichlet_second_moments(n: int, samples: int, rng=None) -> np.ndarray:
    """MC estimate of E[w_i w_j] for w uniform on the standard (n-1)-simplex."""
    w = as_stream(rng).generator.dirichlet(np.ones(n), samples)
    return w.T @ w / samples


def facet_second_moment_mc(F: FacetLike, samples: int = 100_000, rng=None) -> float:
    Y = _facet_matrix(F)
    w = as_stream(rng).generator.dirichlet(np.ones(Y.shape[0]), samples)
    pts = w @ Y
    return float(np.mean(np.sum(pts ** 2, axis=1)))


def max_facet_bound(K: VertexPolytope, cap: int = FACET_CAP) -> float:
    n = K.n
    enum = facet_enumeration(K, cap)
    return n / (n + 2) * max(facet_second_moment(f) for f in enum.facets)


def _exhaustive_signed_sum(Y: np.ndarray) -> float:
    n = Y.shape[0]
    best = 0.0
    total = 1 << (n - 1)
    chunk = 1 << 14
    bits = np.arange(n - 1)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        # first sign fixed to +1; sums are symmetric under eps -> -eps
        signs = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        sums = Y[0] + signs @ Y[1:]
        best = max(best, float(np.max(np.sum(sums ** 2, axis=1))))
    return best


def _greedy_signed_sum(Y: np.ndarray, gen: np.random.Generator, restarts: int) -> float:
    n = Y.shape[0]
    norms = np.sum(Y ** 2, axis=1)
    best = 0.0
    for _ in range(restarts):
        eps = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        S = eps @ Y
        while True:
            # flipping eps_j changes |S|^2 by 4|y_j|^2 - 4 eps_j <S, y_j>
            gain = 4.0 * norms - 4.0 * eps * (Y @ S)
            j = int(np.argmax(gain))
            if gain[j] <= 1e-12 * max(1.0, S @ S):
                break
            S = S - 2.0 * eps[j] * Y[j]
            eps[j] = -eps[j]
        best = max(best, float(S @ S))
    return best


def max_signed_sum(Y, rng=None, exhaustive_limit: int = SIGN_EXHAUSTIVE,
                   restarts: int = SIGN_RESTARTS) -> Tuple[float, bool]:
    """
    max over eps in {-1,1}^n of |sum eps_j y_j|^2.

    Returns (value, exact); beyond `exhaustive_limit` rows the value comes
    from random restarts of single-flip ascent and is only a lower bound.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] <= exhaustive_limit:
        return _exhaustive_signed_sum(Y), True
    value = _greedy_signed_sum(Y, as_stream(rng).generator, restarts)
    log.warning("sign maximum over %d vectors is a lower bound (greedy search)", Y.shape[0])
    return value, False


def sign_max_bound(F: FacetLike, rng=None, exhaustive_limit: int = SIGN_EXHAUSTIVE) -> float:
    Y = _facet_matrix(F)
    n = Y.shape[0]
    value, _ = max_signed_sum(Y, rng, exhaustive_limit)
    return float(2.0 / (n * (n + 1)) * value)


# -- Bernstein --------------------------------------------------------------

@dataclass(frozen=True)
class BernsteinRow:
    t: float
    probability: float
    ci_low: float
    ci_high: float
    envelope: float

    @property
    def within(self) -> bool:
        return self.probability <= self.envelope


@dataclass(frozen=True)
class BernsteinReport:
    rows: Tuple[BernsteinRow, ...]
    c: float
    fitted_c: float

    @property
    def holds(self) -> bool:
        return all(r.within for r in self.rows)


def _bernstein_exponent(t: float, a: np.ndarray, A: float) -> float:
    return min(t ** 2 / (A ** 2 * float(a @ a)), t / (A * float(np.max(np.abs(a)))))


def marginal_sums(dist: Distribution, a: Sequence[float], samples: int, rng=None,
                  theta=None) -> np.ndarray:
    """
    sum_j a_j <x_j, theta> over `samples` trials, the x_j independent draws
    of `dist` with one substream per j. theta defaults to e_1.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError("at least one weight is needed")
    if theta is None:
        theta = np.zeros(dist.n)
        theta[0] = 1.0
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != dist.n:
        raise ValueError(f"marginal direction in R^{theta.size} for a distribution on R^{dist.n}")
    stream = as_stream(rng)
    sums = np.zeros(samples)
    for j, weight in enumerate(a):
        sums += weight * (sample(dist, samples, stream.child("g", j)) @ theta)
    return sums


def bernstein_check(dist: Distribution, a: Sequence[float], A: float, t_grid: Sequence[float],
                    samples: int = 100_000, rng=None, c: float = 0.25,
                    theta=None) -> BernsteinReport:
    """
    Empirical P(|sum a_j g_j| >= t), the g_j i.i.d. copies of the marginal
    <x, theta> of `dist`, against 2 exp(-c min(t^2 / (A^2 |a|_2^2), t / (A |a|_inf))).
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    sums = np.abs(marginal_sums(dist, a, samples, rng, theta))
    rows = []
    fitted = np.inf
    for t in t_grid:
        hits = int(np.count_nonzero(sums >= t))
        p = hits / samples
        ci = stats.binomtest(hits, samples).proportion_ci(method="wilson")
        expo = _bernstein_exponent(float(t), a, A)
        rows.append(BernsteinRow(float(t), p, float(ci.low), float(ci.high),
                                 float(2.0 * np.exp(-c * expo))))
        # largest c with p <= 2 exp(-c expo)
        if p > 0 and expo > 0:
            fitted = min(fitted, -np.log(p / 2.0) / expo)
    return BernsteinReport(tuple(rows), c, float(fitted))


# -- pipeline ---------------------------------------------------------------

@dataclass(frozen=True)
class KKReport:
    n: int
    N: int
    interior: float
    interior_se: float
    facet_bound: Optional[float]
    sign_bound: Optional[float]
    sign_exact: bool
    volume_radius: float
    l_bound_interior: float
    l_bound_facet: Optional[float]
    l_bound_sign: Optional[float]
    isotropic_constant: float
    facet_count: Optional[int]
    perturbed: bool
    provenance: str

    @property
    def log_ratio(self) -> float:
        """log(2N/n)."""
        return float(np.log(2.0 * self.N / self.n))

    @property
    def volume_radius_ratio(self) -> float:
        """|K|^{1/n} sqrt(n) / sqrt(log(2N/n))."""
        return float(self.volume_radius * np.sqrt(self.n) / np.sqrt(self.log_ratio))

    @property
    def facet_count_ok(self) -> Optional[bool]:
        if self.facet_count is None:
            return None
        return self.facet_count <= comb(2 * self.N, self.n)

    def chain_violations(self, slack: float = 0.0) -> List[str]:
        """Names of chain inequalities that fail; slack is absolute MC allowance."""
        tol = CHAIN_TOL * max(1.0, self.interior)
        out = []
        if self.isotropic_constant > self.l_bound_interior * (1.0 + CHAIN_TOL):
            out.append("L <= interior bound")
        if self.facet_bound is not None and self.interior > self.facet_bound + tol + slack:
            out.append("interior <= facet bound")
        if (self.facet_bound is not None and self.sign_bound is not None
                and self.facet_bound > self.sign_bound + tol):
            out.append("facet bound <= sign bound")
        return out


def _l_bound(value: Optional[float], n: int, vol: float) -> Optional[float]:
    if value is None:
        return None
    return float(np.sqrt(value / (n * vol ** (2.0 / n))))


def kk_bound_pipeline(K: VertexPolytope, samples: int = 20_000, rng=None,
                      cap: int = FACET_CAP) -> KKReport:
    """
    The facet bound chain for K: exact moments and facet bounds for n <= cap,
    hit-and-run moments without facet bounds above it.
    """
    stream = as_stream(rng)
    n = K.n
    facet_bound = sign_bound = None
    sign_exact = True
    facet_count = None
    perturbed = False
    try:
        enum = facet_enumeration(K, cap)
    except CapExceeded:
        enum = None
    if enum is not None:
        moments = _exact_moments(K, cap)
        facet_count = enum.count
        perturbed = enum.perturbed
        factor = n / (n + 2)
        facet_bound = factor * max(facet_second_moment(f) for f in enum.facets)
        best_sign = 0.0
        for f in enum.facets:
            value, exact = max_signed_sum(f.vertices, stream.child("signs"))
            sign_exact = sign_exact and exact
            best_sign = max(best_sign, 2.0 / (n * (n + 1)) * value)
        sign_bound = factor * best_sign
    else:
        moments = body_moments(K, "hit-and-run", samples, stream.child("moments"))
        if moments.volume is None:
            raise LowAcceptance("no volume estimate for the bound pipeline")
    vol = moments.volume
    interior = moments.trace
    return KKReport(
        n=n,
        N=K.N,
        interior=interior,
        interior_se=moments.trace_se,
        facet_bound=facet_bound,
        sign_bound=sign_bound,
        sign_exact=sign_exact,
        volume_radius=float(vol ** (1.0 / n)),
        l_bound_interior=_l_bound(interior, n, vol),
        l_bound_facet=_l_bound(facet_bound, n, vol),
        l_bound_sign=_l_bound(sign_bound, n, vol),
        isotropic_constant=isotropic_constant(K, moments),
        facet_count=facet_count,
        perturbed=perturbed,
        provenance=moments.provenance,
    )
