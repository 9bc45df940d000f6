"""
Isotropic log-concave distributions and their moment functionals

Four families are supported: the standard gaussian, the cube
[-sqrt3, sqrt3]^n, and the uniform measures on the Euclidean ball and on the
l1 ball. The last two are put in isotropic position by an empirical
whitening fitted on a pilot sample (Cholesky factor of the inverse
covariance), so no closed-form normalization constants are needed.

Every Monte-Carlo quantity is returned as an Estimate carrying its standard
error, sample count and the label path of the stream it was drawn from.

Functions:
    make_distribution(name, n, rng, pilot):  Build a family, fitting whitening
    sample(dist, count, rng):                i.i.d. draws
    SampleCache.get(dist, count, rng):       Shared write-once sample cache
    centroid_body(dist, q, sample):          Z_q(mu), closed form or MC
    gamma_q(q):                              Gaussian L_q norm of a marginal
    support_values(body, thetas):            h_{Z_q} and errors for a batch
    zq_support(body, theta):                 h_{Z_q}(theta)
    zq_radius(body, directions, rng):        max of h_{Z_q} over directions
    zq_mean_width(body, sphere_draws, rng):  w(Z_q)
    psi_alpha_norm(dist, theta, alpha, sample): Orlicz norm by bisection
    psi2_constant(dist, directions, sample, rng): sup psi2 / L2 ratio
    iq_moment(dist, q, sample):              I_q = (E |x|^q)^{1/q}
    tail_probabilities(dist, n, ts, sample): deviation / small-ball tails
    small_norm_cdf(sample, ts):              P(|x| <= t E|x|) with fitted C
    isotropic_constant_of(dist):             L_mu = sup f^{1/n}

Tail table rows:

| Field       | Meaning                                         |
|-------------|-------------------------------------------------|
| kind        | "deviation" or "small-ball"                     |
| parameter   | t (deviation) or eps (small-ball)               |
| threshold   | the |x| threshold actually applied              |
| probability | empirical frequency                             |
| ci_low/high | Wilson 95% interval                             |
| envelope    | exp(-t sqrt n) or eps^(c4 sqrt n)               |
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln, logsumexp

from randpoly.errors import BracketFailure, DimensionMismatch, NotEnoughSamples
from randpoly.geometry import log_unit_ball_volume, sample_sphere_many
from utils.crypto_utils import sha256_hex
from utils.rng_utils import as_stream

log = logging.getLogger(__name__)

FAMILIES = ("gaussian", "cube", "ball", "l1ball")
WHITENED = ("ball", "l1ball")
SQRT3 = np.sqrt(3.0)
DEFAULT_PILOT = 200_000
MIN_PSI_SAMPLE = 10_000
MIN_TAIL_SAMPLE = 100_000
_CHUNK = 64
ESTIMATE_KINDS = ("mean", "lower-bound", "upper-bound", "exact")


@dataclass(frozen=True)
class Estimate:
    """A Monte-Carlo (or exact) value with its error bar and provenance."""
    value: float
    standard_error: float
    sample_count: int
    provenance: str = ""
    kind: str = "mean"  # mean | lower-bound | upper-bound | exact
    witness: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.standard_error >= 0:
            raise ValueError(f"standard error must be >= 0, got {self.standard_error}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.kind not in ESTIMATE_KINDS:
            raise ValueError(f"unknown estimate kind {self.kind!r}")

    def scaled(self, s: float) -> "Estimate":
        return Estimate(self.value * s, self.standard_error * abs(s),
                        self.sample_count, self.provenance, self.kind, self.witness)


def mean_estimate(values, provenance: str = "", kind: str = "mean") -> Estimate:
    """Sample mean with its standard error."""
    values = np.asarray(values, dtype=float).reshape(-1)
    m = values.size
    se = float(np.std(values, ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return Estimate(float(np.mean(values)), se, m, provenance, kind)


def power_mean_estimate(values, p: float, provenance: str = "") -> Estimate:
    """(mean v^p)^{1/p} with delta-method standard error."""
    values = np.asarray(values, dtype=float).reshape(-1)
    powered = values ** p
    base = mean_estimate(powered, provenance)
    value = base.value ** (1.0 / p)
    se = abs(value / (p * base.value)) * base.standard_error
    return Estimate(float(value), float(se), base.sample_count, provenance)


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    Named isotropic log-concave law on R^n.

    `whitening` and `shift` act post-sampling: x -> W (x - shift). They are
    None for the gaussian and the cube, which are isotropic as drawn.
    """
    name: str
    n: int
    whitening: Optional[np.ndarray] = None
    shift: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown distribution {self.name!r}; expected one of {FAMILIES}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.whitening is not None:
            w = np.asarray(self.whitening, dtype=float)
            if w.shape != (self.n, self.n):
                raise DimensionMismatch(f"whitening must be {self.n}x{self.n}")
            object.__setattr__(self, "whitening", w)
        if self.shift is not None:
            object.__setattr__(self, "shift", np.asarray(self.shift, dtype=float).reshape(self.n))

    @property
    def fingerprint(self) -> str:
        w = b"" if self.whitening is None else self.whitening.tobytes()
        s = b"" if self.shift is None else self.shift.tobytes()
        return sha256_hex(self.name.encode() + bytes([0]) + w + s)[:16] + f":{self.n}"


def _base_sample(name: str, n: int, count: int, gen: np.random.Generator) -> np.ndarray:
    if name == "gaussian":
        return gen.standard_normal((count, n))
    if name == "cube":
        return gen.uniform(-SQRT3, SQRT3, (count, n))
    if name == "ball":
        g = gen.standard_normal((count, n))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0.0] = 1.0
        radii = gen.random(count) ** (1.0 / n)
        return g / norms[:, None] * radii[:, None]
    # l1ball: (eps_i E_i) / (E_1 + ... + E_{n+1}) is uniform on the unit l1 ball
    e = gen.standard_exponential((count, n + 1))
    signs = np.where(gen.random((count, n)) < 0.5, -1.0, 1.0)
    return signs * e[:, :n] / e.sum(axis=1)[:, None]


def sample(dist: Distribution, count: int, rng=None) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    x = _base_sample(dist.name, dist.n, count, as_stream(rng).generator)
    if dist.shift is not None:
        x = x - dist.shift
    if dist.whitening is not None:
        x = x @ dist.whitening.T
    return x


def fit_whitening(points: np.ndarray):
    """
    Empirical whitening of a centered point cloud.

    Returns (W, shift) with W = L^T for the Cholesky factor L of the inverse
    empirical covariance, so W Cov W^T = I.
    """
    shift = points.mean(axis=0)
    cov = np.atleast_2d(np.cov(points - shift, rowvar=False))
    chol = np.linalg.cholesky(np.linalg.inv(cov))
    return chol.T, shift


def make_distribution(name: str, n: int, rng=None, pilot: int = DEFAULT_PILOT) -> Distribution:
    """Build a family; ball and l1ball get whitening fitted on `pilot` draws."""
    if name not in FAMILIES:
        raise ValueError(f"unknown distribution {name!r}; expected one of {FAMILIES}")
    if name not in WHITENED:
        return Distribution(name, n)
    stream = as_stream(rng).child("whitening", name, n)
    points = _base_sample(name, n, pilot, stream.generator)
    w, _ = fit_whitening(points)
    # The base bodies are symmetric; the shift is fixed at zero.
    log.debug("fitted whitening for %s n=%d on %d pilot draws", name, n, pilot)
    return Distribution(name, n, whitening=w)


def isotropic_constant_of(dist: Distribution) -> float:
    """L_mu = (sup density)^{1/n}."""
    n = dist.n
    if dist.name == "gaussian":
        return float(1.0 / np.sqrt(2.0 * np.pi))
    if dist.name == "cube":
        return float(1.0 / np.sqrt(12.0))
    if dist.name == "ball":
        log_base = log_unit_ball_volume(n)
    else:
        log_base = n * np.log(2.0) - gammaln(n + 1.0)
    log_det = 0.0
    if dist.whitening is not None:
        log_det = float(np.linalg.slogdet(dist.whitening)[1])
    return float(np.exp(-(log_base + log_det) / n))


class SampleCache:
    """
    Write-once cache of samples keyed by (distribution, stream, count).

    Cached arrays are read-only, so Z_p and Z_q built on the same key are
    compared on identical draws.
    """

    def __init__(self):
        self._store: Dict[tuple, np.ndarray] = {}

    def get(self, dist: Distribution, count: int, rng) -> np.ndarray:
        stream = as_stream(rng)
        key = (dist.fingerprint, stream.provenance, int(count))
        cached = self._store.get(key)
        if cached is None:
            cached = sample(dist, count, stream)
            cached.setflags(write=False)
            self._store[key] = cached
        return cached

    def __len__(self):
        return len(self._store)


@dataclass(frozen=True, eq=False)
class CentroidBody:
    """Z_q(mu); closed form for the gaussian when no sample is attached."""
    distribution: Distribution
    q: float
    sample: Optional[np.ndarray] = None
    provenance: str = ""

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("centroid bodies need q >= 1")
        if self.sample is None and self.distribution.name != "gaussian":
            raise ValueError(f"{self.distribution.name} centroid body needs a sample")
        if self.sample is not None and self.sample.shape[1] != self.distribution.n:
            raise DimensionMismatch("sample dimension does not match distribution")

    @property
    def mode(self) -> str:
        return "closed-form" if self.sample is None else "monte-carlo"

    @property
    def n(self) -> int:
        return self.distribution.n


def centroid_body(dist: Distribution, q: float, sample_points=None,
                  provenance: str = "") -> CentroidBody:
    return CentroidBody(dist, float(q), sample_points, provenance)


def gamma_q(q: float) -> float:
    """(E|g|^q)^{1/q} = (2^{q/2} Gamma((q+1)/2) / sqrt(pi))^{1/q}."""
    log_moment = 0.5 * q * np.log(2.0) + gammaln(0.5 * (q + 1.0)) - 0.5 * np.log(np.pi)
    return float(np.exp(log_moment / q))


def support_values(body: CentroidBody, thetas: np.ndarray):
    """h_{Z_q} and delta-method errors for a batch of directions."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != body.n:
        raise DimensionMismatch(f"direction has dimension {thetas.shape[1]}, body has n={body.n}")
    if body.sample is None:
        return gamma_q(body.q) * np.linalg.norm(thetas, axis=1), np.zeros(len(thetas))
    m = body.sample.shape[0]
    if body.q > 2.0 * np.log(m):
        raise NotEnoughSamples(f"q={body.q} exceeds 2 ln M = {2.0 * np.log(m):.2f} for M={m}")
    values = np.empty(len(thetas))
    errors = np.empty(len(thetas))
    for start in range(0, len(thetas), _CHUNK):
        block = thetas[start:start + _CHUNK]
        powered = np.abs(body.sample @ block.T) ** body.q
        mean = powered.mean(axis=0)
        sd = powered.std(axis=0, ddof=1) if m > 1 else np.zeros_like(mean)
        value = mean ** (1.0 / body.q)
        values[start:start + _CHUNK] = value
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.where(mean > 0, value / (body.q * mean) * sd / np.sqrt(m), 0.0)
        errors[start:start + _CHUNK] = err
    return values, errors


def zq_support(body: CentroidBody, theta) -> Estimate:
    values, errors = support_values(body, theta)
    if body.sample is None:
        return Estimate(float(values[0]), 0.0, 1, body.provenance, "exact")
    return Estimate(float(values[0]), float(errors[0]), body.sample.shape[0], body.provenance)


def zq_radius(body: CentroidBody, directions: int, rng=None) -> Estimate:
    """Max of h_{Z_q} over sampled directions; a lower bound on R(Z_q)."""
    if directions < 1:
        raise ValueError("directions must be >= 1")
    stream = as_stream(rng)
    thetas = sample_sphere_many(body.n, directions, stream.child("directions"))
    values, errors = support_values(body, thetas)
    best = int(np.argmax(values))
    kind = "exact" if body.sample is None else "lower-bound"
    return Estimate(float(values[best]), float(errors[best]), directions,
                    stream.provenance, kind)


def zq_mean_width(body: CentroidBody, sphere_draws: int, rng=None) -> Estimate:
    """w(Z_q) = integral of h_{Z_q} over the sphere."""
    if body.sample is None:
        return Estimate(gamma_q(body.q), 0.0, 1, body.provenance, "exact")
    stream = as_stream(rng)
    values, _ = support_values(body, sample_sphere_many(body.n, sphere_draws, stream.child("sphere")))
    return mean_estimate(values, stream.provenance)


def _check_sample(dist: Distribution, points, minimum: int) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != dist.n:
        raise DimensionMismatch(f"sample has dimension {points.shape[1]}, distribution n={dist.n}")
    if points.shape[0] < minimum:
        raise ValueError(f"need at least {minimum} sample points, got {points.shape[0]}")
    return points


def _psi_root(s: np.ndarray, alpha: int) -> float:
    sigma = float(np.sqrt(np.mean(s ** 2)))
    if sigma == 0.0:
        return 0.0
    log_m = np.log(s.size)

    def excess(t):
        # log E exp((s/t)^alpha) - log 2, computed without overflow
        return logsumexp((s / t) ** alpha) - log_m - np.log(2.0)

    lo, hi = 0.1 * sigma, 50.0 * sigma
    f_lo, f_hi = excess(lo), excess(hi)
    if not (f_lo > 0.0 > f_hi):
        raise BracketFailure(
            f"no sign change on [{lo:.4g}, {hi:.4g}] ({f_lo:.3g}, {f_hi:.3g}); raise the sample size")
    return float(optimize.bisect(excess, lo, hi, xtol=1e-12 * sigma, maxiter=200))


def psi_alpha_norm(dist: Distribution, theta, alpha: int, sample_points,
                   batches: int = 8) -> Estimate:
    """
    ||<., theta>||_{psi_alpha} on a fixed empirical sample.

    The error bar is the spread of the same root over `batches` disjoint
    sub-samples.
    """
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    points = _check_sample(dist, sample_points, MIN_PSI_SAMPLE)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != dist.n:
        raise DimensionMismatch("direction dimension does not match distribution")
    s = np.abs(points @ theta)
    value = _psi_root(s, alpha)
    se = 0.0
    try:
        roots = [_psi_root(part, alpha) for part in np.array_split(s, batches)]
        se = float(np.std(roots, ddof=1) / np.sqrt(batches))
    except BracketFailure:
        log.warning("psi_%d batch root failed; standard error reported as 0", alpha)
    return Estimate(value, se, s.size)


def psi2_constant(dist: Distribution, directions: int, sample_points, rng=None) -> Estimate:
    """Empirical b = sup_theta ||<., theta>||_psi2 / ||<., theta>||_2 (lower bound)."""
    points = _check_sample(dist, sample_points, MIN_PSI_SAMPLE)
    stream = as_stream(rng)
    best = 0.0
    for theta in sample_sphere_many(dist.n, directions, stream.child("directions")):
        s = np.abs(points @ theta)
        sigma = float(np.sqrt(np.mean(s ** 2)))
        ratio = _psi_root(s, 2) / sigma
        if ratio > best:
            best = ratio
    # The max over directions carries no meaningful error bar.
    return Estimate(best, 0.0, directions, stream.provenance, "lower-bound")


def iq_moment(dist: Distribution, q: float, sample_points, provenance: str = "") -> Estimate:
    """I_q(mu) = (E |x|_2^q)^{1/q}, q in (-n, inf) minus 0."""
    if q == 0 or q <= -dist.n:
        raise ValueError(f"q must be nonzero and > -n, got {q}")
    points = _check_sample(dist, sample_points, MIN_PSI_SAMPLE)
    return power_mean_estimate(np.linalg.norm(points, axis=1), q, provenance)


@dataclass(frozen=True)
class TailRow:
    kind: str
    parameter: float
    threshold: float
    probability: float
    ci_low: float
    ci_high: float
    envelope: float


def _wilson(hits: int, total: int):
    ci = stats.binomtest(int(hits), int(total)).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def tail_probabilities(dist: Distribution, n: int, thresholds: Sequence[float], sample_points,
                       epsilons: Sequence[float] = (), c3: float = 1.0,
                       c4: float = 1.0) -> List[TailRow]:
    """
    Empirical deviation tails P(|x| >= c3 t sqrt n) and small-ball
    probabilities P(|x| < eps sqrt n), each with a Wilson interval and the
    envelope exp(-t sqrt n) resp. eps^(c4 sqrt n).
    """
    if n != dist.n:
        raise DimensionMismatch(f"n={n} does not match distribution n={dist.n}")
    points = _check_sample(dist, sample_points, MIN_TAIL_SAMPLE)
    norms = np.linalg.norm(points, axis=1)
    total = norms.size
    root_n = np.sqrt(n)
    rows = []
    for t in thresholds:
        threshold = c3 * t * root_n
        hits = int(np.count_nonzero(norms >= threshold))
        low, high = _wilson(hits, total)
        rows.append(TailRow("deviation", float(t), float(threshold), hits / total,
                            low, high, float(np.exp(-t * root_n))))
    for eps in epsilons:
        threshold = eps * root_n
        hits = int(np.count_nonzero(norms < threshold))
        low, high = _wilson(hits, total)
        rows.append(TailRow("small-ball", float(eps), float(threshold), hits / total,
                            low, high, float(eps ** (c4 * root_n))))
    return rows


@dataclass(frozen=True)
class SmallNormCDF:
    ts: np.ndarray
    probabilities: np.ndarray
    fitted_c: float


def small_norm_cdf(sample_points, ts: Sequence[float]) -> SmallNormCDF:
    """P(|x| <= t E|x|) for each t > 0, and C = max_t P / t."""
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0 or np.any(ts <= 0):
        raise ValueError(f"small-norm levels must be positive, got {ts.tolist()}")
    norms = np.linalg.norm(np.atleast_2d(sample_points), axis=1)
    mean = norms.mean()
    probs = np.array([np.mean(norms <= t * mean) for t in ts])
    return SmallNormCDF(ts, probs, float(np.max(probs / ts)))


def fitted_envelope_constant(empirical, envelope) -> float:
    """Smallest C with empirical <= C * envelope pointwise."""
    empirical = np.asarray(empirical, dtype=float)
    envelope = np.asarray(envelope, dtype=float)
    mask = empirical > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(empirical[mask] / envelope[mask]))
