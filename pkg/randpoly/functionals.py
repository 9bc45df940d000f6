"""
Geometric functionals of symmetric polytopes

Widths, quermassintegrals (through Kubota's formula), projection and
section radii, and the gauge averages M and b. Monte-Carlo functionals take
a Stream and derive one child stream per frame / direction batch, so two
functionals evaluated on the same stream see the same frames (common random
numbers) and results do not depend on evaluation order.

Mean width follows the integral convention w(C) = int h_C dsigma, so
w(B_2^n) = 1.

Functions:
    mean_width(K, sphere_draws, rng):              w(K)
    p_mean_width(K, p, sphere_draws, rng):         w_p(K)
    polar_volume_radius(K, sphere_draws, rng):     v.rad(K polar)
    quermass_Qk(K, k, subspace_draws, rng):        Q_k(K)
    quermass_profile(K, ks, subspace_draws, rng):  Q_k for several k on nested frames
    proj_volume_radius(K, frame):                  v.rad(P_F K), exact
    outer_radius_Rk(K, k, subspace_draws, rng):    mean R(P_F K)
    projection_radius_quantile(K, k, frames, quantile, rng)
    radius(K):                                     R(K)
    section_radius(K, frame, directions, rng):     lower bound on R(K cap F)
    inner_mean_Dk(K, k, subspace_draws, directions, rng)
    section_k_mean(K, k, subspace_draws, directions, rng)
    M_value(K, sphere_draws, rng), b_value(K, directions, rng)
    exceedance_fraction, moment_ratio, inclusion_constant:  K_N against Z_q
    outer_radius_envelope(w, R, k, n):             w + sqrt(k/n) R

Report rows:

| Field      | Meaning                                          |
|------------|--------------------------------------------------|
| name       | functional, e.g. "Q_k"                           |
| params     | {"k": 2} / {"p": 0.5} / {"q": 4.0}               |
| estimate   | Estimate with provenance                         |
| budgets    | {"subspaces": 200, "directions": 500, ...}       |
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np

from randpoly.errors import CapExceeded, DegenerateInput
from randpoly.geometry import (
    Frame,
    identity_frame,
    log_unit_ball_volume,
    nested_frames,
    project,
    sample_frame,
    sample_sphere_many,
)
from randpoly.measures import (
    CentroidBody,
    Estimate,
    support_values,
    mean_estimate,
    power_mean_estimate,
)
from randpoly.polytope import (
    FACET_CAP,
    VertexPolytope,
    facets,
    gauge_many,
    radial_many,
    support_many,
    volume_exact,
)
from utils.io_utils import ResultRow
from utils.rng_utils import as_stream

log = logging.getLogger(__name__)

SPHERE_DRAWS = 10_000
SUBSPACE_DRAWS = 200
DIRECTIONS = 500
MIN_DIRECTIONS = 50


@dataclass(frozen=True)
class FunctionalReport:
    name: str
    estimate: Estimate
    params: Dict[str, float] = field(default_factory=dict)
    budgets: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 1 for v in self.budgets.values()):
            raise ValueError("budgets must be >= 1")

    def to_row(self, trial: int) -> ResultRow:
        budget = max(self.budgets.values()) if self.budgets else self.estimate.sample_count
        return ResultRow(
            trial=trial,
            functional=self.name,
            value=self.estimate.value,
            stderr=self.estimate.standard_error,
            budget=budget,
            seed=self.estimate.provenance,
            k=self.params.get("k"),
            q=self.params.get("q", self.params.get("p")),
            t=self.params.get("t"),
        )


def _sphere(K, draws: int, stream) -> np.ndarray:
    if draws < 1:
        raise ValueError("sphere_draws must be >= 1")
    return sample_sphere_many(K.n, draws, stream.child("sphere"))


# -- widths -----------------------------------------------------------------

def mean_width(K: VertexPolytope, sphere_draws: int = SPHERE_DRAWS, rng=None) -> Estimate:
    if sphere_draws < 100:
        raise ValueError("mean_width needs at least 100 sphere draws")
    stream = as_stream(rng)
    return mean_estimate(support_many(K, _sphere(K, sphere_draws, stream)), stream.provenance)


def p_mean_width(K: VertexPolytope, p: float, sphere_draws: int = SPHERE_DRAWS,
                 rng=None) -> Estimate:
    """w_p(K) = (int h^p dsigma)^{1/p}; negative p reuses the same draws."""
    if p == 0 or p <= -(K.n - 1):
        raise ValueError(f"need p != 0 and p > -(n-1), got {p}")
    if sphere_draws < 100:
        raise ValueError("p_mean_width needs at least 100 sphere draws")
    stream = as_stream(rng)
    h = support_many(K, _sphere(K, sphere_draws, stream))
    if p == 1:
        return mean_estimate(h, stream.provenance)
    return power_mean_estimate(h, p, stream.provenance)


def polar_volume_radius(K: VertexPolytope, sphere_draws: int = SPHERE_DRAWS,
                        rng=None) -> Estimate:
    """
    (|K polar| / omega_n)^{1/n} = (int h_K^{-n} dsigma)^{1/n} = 1 / w_{-n}(K).
    """
    stream = as_stream(rng)
    h = support_many(K, _sphere(K, sphere_draws, stream))
    w = power_mean_estimate(h, -K.n, stream.provenance)
    return Estimate(1.0 / w.value, w.standard_error / w.value ** 2, w.sample_count,
                    stream.provenance)


# -- projections ------------------------------------------------------------

def _projected_volume(K: VertexPolytope, frame: Frame, cap: int) -> float:
    coords = project(K.generators, frame)
    if frame.k == 1:
        return float(2.0 * np.max(np.abs(coords)))
    if frame.k > cap:
        raise CapExceeded(f"k={frame.k} exceeds the exact-hull cap {cap}")
    try:
        return volume_exact(VertexPolytope(coords), cap)
    except DegenerateInput:
        # projection does not span F
        return 0.0


def proj_volume_radius(K: VertexPolytope, frame: Frame, cap: int = FACET_CAP) -> float:
    vol = _projected_volume(K, frame, cap)
    return float(np.exp((np.log(vol) - log_unit_ball_volume(frame.k)) / frame.k)) if vol > 0 else 0.0


def _qk_from_volumes(vols: np.ndarray, k: int, provenance: str) -> Estimate:
    mean = mean_estimate(vols, provenance)
    omega = np.exp(log_unit_ball_volume(k))
    value = (mean.value / omega) ** (1.0 / k)
    se = value / (k * mean.value) * mean.standard_error if mean.value > 0 else 0.0
    return Estimate(float(value), float(se), vols.size, provenance)


def quermass_Qk(K: VertexPolytope, k: int, subspace_draws: int = SUBSPACE_DRAWS,
                rng=None, cap: int = FACET_CAP) -> Estimate:
    """Q_k(K) = ((1/omega_k) E_F |P_F K|)^{1/k} over Haar frames."""
    if not 1 <= k <= K.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    if k > cap:
        raise CapExceeded(f"k={k} exceeds the exact-hull cap {cap}")
    stream = as_stream(rng)
    if k == K.n:
        vol = volume_exact(K, cap)
        value = float(np.exp((np.log(vol) - log_unit_ball_volume(k)) / k))
        return Estimate(value, 0.0, 1, stream.provenance, "exact")
    if subspace_draws < 1:
        raise ValueError("subspace_draws must be >= 1")
    vols = np.array([
        _projected_volume(K, sample_frame(K.n, k, stream.child("frame", i)), cap)
        for i in range(subspace_draws)
    ])
    return _qk_from_volumes(vols, k, stream.provenance)


def quermass_profile(K: VertexPolytope, ks: Iterable[int], subspace_draws: int = SUBSPACE_DRAWS,
                     rng=None, cap: int = FACET_CAP) -> Dict[int, Estimate]:
    """
    Q_k for every k in ks from nested frames: frame i for rank k is the span
    of the first k columns of one Haar basis, shared by all k.
    """
    ks = sorted(set(int(k) for k in ks))
    if ks and ks[-1] > cap:
        raise CapExceeded(f"k={ks[-1]} exceeds the exact-hull cap {cap}")
    stream = as_stream(rng)
    vols = {k: np.empty(subspace_draws) for k in ks}
    for i in range(subspace_draws):
        frames = nested_frames(K.n, ks, stream.child("frame", i))
        for k in ks:
            vols[k][i] = _projected_volume(K, frames[k], cap)
    return {k: _qk_from_volumes(vols[k], k, stream.provenance) for k in ks}


def radius(K: VertexPolytope) -> float:
    return K.radius


def _projection_radii(K: VertexPolytope, k: int, draws: int, stream) -> np.ndarray:
    return np.array([
        float(np.max(np.linalg.norm(project(K.generators, sample_frame(K.n, k, stream.child("frame", i))),
                                    axis=1)))
        for i in range(draws)
    ])


def outer_radius_Rk(K: VertexPolytope, k: int, subspace_draws: int = SUBSPACE_DRAWS,
                    rng=None) -> Estimate:
    """Mean over Haar F of R(P_F K) = max_j |P_F x_j|."""
    if not 1 <= k <= K.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    stream = as_stream(rng)
    if k == K.n:
        return Estimate(K.radius, 0.0, 1, stream.provenance, "exact")
    return mean_estimate(_projection_radii(K, k, subspace_draws, stream), stream.provenance)


def projection_radius_quantile(K: VertexPolytope, k: int, frames: int = SUBSPACE_DRAWS,
                               quantile: float = 0.95, rng=None) -> float:
    stream = as_stream(rng)
    return float(np.quantile(_projection_radii(K, k, frames, stream), quantile))


def outer_radius_envelope(w: float, R: float, k: int, n: int) -> float:
    return w + np.sqrt(k / n) * R


# -- sections ---------------------------------------------------------------

def section_radius(K: VertexPolytope, frame: Frame, directions: int = DIRECTIONS,
                   rng=None) -> Estimate:
    """
    max over sampled unit u in F of r_K(u); a lower bound on R(K cap F).

    The maximizing direction is kept as the estimate's witness.
    """
    if directions < MIN_DIRECTIONS:
        raise ValueError(f"need at least {MIN_DIRECTIONS} directions, got {directions}")
    stream = as_stream(rng)
    coords = sample_sphere_many(frame.k, directions, stream.child("section"))
    thetas = frame.embed(coords)
    thetas /= np.linalg.norm(thetas, axis=1)[:, None]
    radii = radial_many(K, thetas)
    best = int(np.argmax(radii))
    return Estimate(float(radii[best]), 0.0, directions, stream.provenance, "lower-bound",
                    tuple(float(v) for v in thetas[best]))


def _section_radii(K, k, subspace_draws, directions, stream) -> np.ndarray:
    out = np.empty(subspace_draws)
    for i in range(subspace_draws):
        frame_stream = stream.child("frame", i)
        frame = sample_frame(K.n, k, frame_stream)
        out[i] = section_radius(K, frame, directions, frame_stream).value
    return out


def inner_mean_Dk(K: VertexPolytope, k: int, subspace_draws: int = SUBSPACE_DRAWS,
                  directions: int = DIRECTIONS, rng=None) -> Estimate:
    """Mean over Haar F of the section radius R(K cap F)."""
    stream = as_stream(rng)
    if k == K.n:
        frame = identity_frame(K.n, k)
        return section_radius(K, frame, directions, stream.child("frame", 0))
    return mean_estimate(_section_radii(K, k, subspace_draws, directions, stream), stream.provenance)


def section_k_mean(K: VertexPolytope, k: int, subspace_draws: int = SUBSPACE_DRAWS,
                   directions: int = DIRECTIONS, rng=None) -> Estimate:
    """(E_F R(K cap F)^k)^{1/k}."""
    stream = as_stream(rng)
    radii = _section_radii(K, k, subspace_draws, directions, stream)
    return power_mean_estimate(radii, k, stream.provenance)


# -- gauge averages ---------------------------------------------------------

def M_value(K: VertexPolytope, sphere_draws: int = SPHERE_DRAWS, rng=None) -> Estimate:
    """M(K) = int ||theta||_K dsigma."""
    stream = as_stream(rng)
    return mean_estimate(gauge_many(K, _sphere(K, sphere_draws, stream)), stream.provenance)


def b_value(K: VertexPolytope, directions: int = SPHERE_DRAWS, rng=None) -> float:
    """
    b(K) = max_theta ||theta||_K: exact (1 / smallest facet offset) when the
    facet list is available, else a lower bound from sampled directions.
    """
    if K.n <= FACET_CAP:
        try:
            return float(1.0 / min(f.offset for f in facets(K)))
        except DegenerateInput:
            pass
    stream = as_stream(rng)
    return float(np.max(gauge_many(K, _sphere(K, directions, stream))))


# -- comparison with centroid bodies ----------------------------------------

def _ratios(K: VertexPolytope, body: CentroidBody, directions: int, stream) -> np.ndarray:
    thetas = sample_sphere_many(K.n, directions, stream.child("directions"))
    hz, _ = support_values(body, thetas)
    return support_many(K, thetas) / hz


def moment_ratio(K: VertexPolytope, body: CentroidBody, directions: int = 1000,
                 rng=None) -> Estimate:
    """(int (h_K / h_{Z_q})^q dsigma)^{1/q}."""
    stream = as_stream(rng)
    return power_mean_estimate(_ratios(K, body, directions, stream), body.q, stream.provenance)


def inclusion_constant(K: VertexPolytope, body: CentroidBody, directions: int = 1000,
                       rng=None) -> Estimate:
    """min over sampled theta of h_K / h_{Z_q}; an upper bound on the true min."""
    stream = as_stream(rng)
    ratios = _ratios(K, body, directions, stream)
    return Estimate(float(np.min(ratios)), 0.0, directions, stream.provenance, "upper-bound")


def exceedance_fraction(K: VertexPolytope, body: CentroidBody, alpha: float,
                        sphere_draws: int = SPHERE_DRAWS, rng=None) -> Estimate:
    """sigma({theta : h_K(theta) >= alpha h_{Z_q}(theta)})."""
    stream = as_stream(rng)
    hits = _ratios(K, body, sphere_draws, stream) >= alpha
    p = float(np.mean(hits))
    return Estimate(p, float(np.sqrt(p * (1.0 - p) / hits.size)), hits.size, stream.provenance)


def exceedance_envelope(N: int, alpha: float, q: float) -> float:
    return float(N * alpha ** (-q))


def holder_gap(K: VertexPolytope, sphere_draws: int = SPHERE_DRAWS, rng=None,
               volume: Optional[float] = None) -> float:
    """M(K) * v.rad(K); at least 1 by Holder in polar coordinates."""
    vol = volume_exact(K) if volume is None else volume
    vrad = np.exp((np.log(vol) - log_unit_ball_volume(K.n)) / K.n)
    return float(M_value(K, sphere_draws, rng).value * vrad)
