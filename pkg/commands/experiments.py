"""
Random polytope lab - experiment trials

One function per experiment turns (config, N, trial) into long-format rows.
Every trial draws its own K_N from the substream

    seed / <experiment> / N / <N> / trial / <i>

and every functional inside a trial takes a named child of that stream, so a
trial can be rerun on its own and gives the same rows.

Functions:
    trial_stream(cfg, N, trial):     Substream of one trial
    distribution_for(cfg):           The configured Distribution (cached)
    draw_polytope(cfg, N, stream):   K_N for one trial
    widths_trial / quermass_trial / radii_trial / sections_trial /
    entropy_trial / isoconst_trial / tails_trial / inclusion_trial
    scaling_trial(cfg, trial):       Nested K_N over the N-grid, rows per N

Functionals written by each experiment:

| Experiment | functional column                                       |
|------------|---------------------------------------------------------|
| widths     | mean_width, w_p, R, M, polar_vrad                       |
| quermass   | Q_k, mean_width                                         |
| radii      | R_k, R_k_ratio, R_k_q95                                 |
| sections   | D_k, section_k_mean, section_mean_product               |
| entropy    | log_covering_primal, log_covering_dual, fitted_c_*      |
| isoconst   | interior, facet_bound, sign_bound, L, L_bound, vrad_ratio |
| tails      | deviation, small_ball, I_q, small_norm_c                |
| inclusion  | inclusion_c                                             |
"""
from functools import lru_cache
from typing import Dict, List

import numpy as np

from randpoly.entropy import regularity_profile
from randpoly.functionals import (
    M_value,
    inclusion_constant,
    inner_mean_Dk,
    mean_width,
    outer_radius_envelope,
    outer_radius_Rk,
    p_mean_width,
    polar_volume_radius,
    projection_radius_quantile,
    quermass_profile,
    section_k_mean,
)
from randpoly.isoconst import kk_bound_pipeline
from randpoly.measures import (
    Distribution,
    Estimate,
    MIN_TAIL_SAMPLE,
    centroid_body,
    iq_moment,
    make_distribution,
    sample,
    small_norm_cdf,
    tail_probabilities,
)
from randpoly.polytope import VertexPolytope, random_polytope
from utils.config_utils import ExperimentConfig
from utils.io_utils import ResultRow
from utils.rng_utils import Stream

SMALL_BALL_EPS = (0.1, 0.2, 0.3)
SMALL_NORM_TS = (0.01, 0.02, 0.05, 0.1, 0.2)
INCLUSION_DIRECTIONS = 1000


def trial_stream(cfg: ExperimentConfig, N: int, trial: int, experiment: str = None) -> Stream:
    return Stream(cfg.seed).child(experiment or cfg.experiment, "N", N, "trial", trial)


@lru_cache(maxsize=16)
def _distribution(name: str, n: int, seed: int) -> Distribution:
    return make_distribution(name, n, Stream(seed).child("distribution", name, n))


def distribution_for(cfg: ExperimentConfig) -> Distribution:
    return _distribution(cfg.distribution, cfg.n, cfg.seed)


def draw_polytope(cfg: ExperimentConfig, N: int, stream: Stream) -> VertexPolytope:
    return random_polytope(distribution_for(cfg), N, stream.child("polytope"))


def _row(trial: int, name: str, est: Estimate, budget: int, **params) -> ResultRow:
    return ResultRow(trial=trial, functional=name, value=est.value, stderr=est.standard_error,
                     budget=budget, seed=est.provenance, **params)


def _exact(trial: int, name: str, value: float, stream: Stream, **params) -> ResultRow:
    return ResultRow(trial=trial, functional=name, value=float(value), stderr=0.0, budget=1,
                     seed=stream.provenance, **params)


# -- polytope experiments ---------------------------------------------------

def widths_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    sphere = cfg.budgets.sphere
    rows = [
        _row(trial, "mean_width", mean_width(K, sphere, stream.child("mean_width")), sphere),
        _exact(trial, "R", K.radius, stream),
        _row(trial, "M", M_value(K, sphere, stream.child("M")), sphere),
        _row(trial, "polar_vrad", polar_volume_radius(K, sphere, stream.child("polar_vrad")), sphere),
    ]
    for p in cfg.q:
        est = p_mean_width(K, p, sphere, stream.child("mean_width"))
        rows.append(_row(trial, "w_p", est, sphere, q=p))
    return rows


def quermass_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    draws = cfg.budgets.subspaces
    profile = quermass_profile(K, cfg.k, draws, stream.child("quermass"))
    rows = [_row(trial, "Q_k", est, draws, k=k) for k, est in sorted(profile.items())]
    if 1 in profile:
        rows.append(_row(trial, "mean_width",
                         mean_width(K, cfg.budgets.sphere, stream.child("mean_width")),
                         cfg.budgets.sphere))
    return rows


def radii_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    b = cfg.budgets
    w = mean_width(K, b.sphere, stream.child("mean_width")).value
    rows = [_exact(trial, "R", K.radius, stream)]
    for k in cfg.k:
        child = stream.child("R_k", k)
        est = outer_radius_Rk(K, k, b.subspaces, child)
        envelope = outer_radius_envelope(w, K.radius, k, K.n)
        rows.append(_row(trial, "R_k", est, b.subspaces, k=k))
        rows.append(_row(trial, "R_k_ratio", est.scaled(1.0 / envelope), b.subspaces, k=k))
        q95 = projection_radius_quantile(K, k, b.subspaces, 0.95, child)
        rows.append(_exact(trial, "R_k_q95", q95, child, k=k))
    return rows


def sections_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    b = cfg.budgets
    M = M_value(K, b.sphere, stream.child("M")).value
    rows = []
    for k in cfg.k:
        child = stream.child("sections", k)
        rows.append(_row(trial, "D_k", inner_mean_Dk(K, k, b.subspaces, b.directions, child),
                         b.subspaces, k=k))
        if k < K.n:
            est = section_k_mean(K, k, b.subspaces, b.directions, child)
            rows.append(_row(trial, "section_k_mean", est, b.subspaces, k=k))
            rows.append(_row(trial, "section_mean_product", est.scaled(M), b.subspaces, k=k))
    return rows


def entropy_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    child = stream.child("entropy")
    pool = cfg.budgets.pool
    rows = []
    for report in regularity_profile(K, cfg.t, {"pool": pool}, child):
        for t, value in zip(report.t_grid, report.upper):
            rows.append(_exact(trial, f"log_covering_{report.direction}", value, child, t=float(t)))
        fitted = float(np.max(report.fitted_c))
        rows.append(_exact(trial, f"fitted_c_{report.direction}", fitted, child))
    return rows


def isoconst_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    K = draw_polytope(cfg, N, stream)
    child = stream.child("isoconst")
    report = kk_bound_pipeline(K, cfg.budgets.interior, child)
    budget = 1 if report.provenance == "exact" else cfg.budgets.interior
    rows = [
        ResultRow(trial, "interior", report.interior, report.interior_se, budget, child.provenance),
        _exact(trial, "L", report.isotropic_constant, child),
        _exact(trial, "L_bound", report.l_bound_interior, child),
        _exact(trial, "vrad_ratio", report.volume_radius_ratio, child),
    ]
    if report.facet_bound is not None:
        rows.append(_exact(trial, "facet_bound", report.facet_bound, child))
        rows.append(_exact(trial, "sign_bound", report.sign_bound, child))
    return rows


def inclusion_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial, "inclusion")
    dist = distribution_for(cfg)
    K = draw_polytope(cfg, N, stream)
    points = None
    if dist.name != "gaussian":
        # one Z_q sample per run, shared by all trials
        points = sample(dist, cfg.budgets.volume, Stream(cfg.seed).child("inclusion", "zq"))
    rows = []
    for q in cfg.q:
        body = centroid_body(dist, q, points)
        est = inclusion_constant(K, body, INCLUSION_DIRECTIONS, stream.child("inclusion_c", q))
        rows.append(_row(trial, "inclusion_c", est, INCLUSION_DIRECTIONS, q=q))
    return rows


# -- distribution experiments -----------------------------------------------

def tails_trial(cfg: ExperimentConfig, N: int, trial: int) -> List[ResultRow]:
    stream = trial_stream(cfg, N, trial)
    dist = distribution_for(cfg)
    count = max(cfg.budgets.volume, MIN_TAIL_SAMPLE)
    points = sample(dist, count, stream.child("sample"))
    rows = []
    for tail in tail_probabilities(dist, cfg.n, cfg.t, points, SMALL_BALL_EPS):
        name = "deviation" if tail.kind == "deviation" else "small_ball"
        p = tail.probability
        rows.append(ResultRow(trial, name, p, float(np.sqrt(p * (1.0 - p) / count)), count,
                              stream.provenance, t=tail.parameter))
    for q in cfg.q:
        rows.append(_row(trial, "I_q", iq_moment(dist, q, points, stream.provenance), count, q=q))
    cdf = small_norm_cdf(points, SMALL_NORM_TS)
    rows.append(_exact(trial, "small_norm_c", cdf.fitted_c, stream))
    return rows


TRIALS = {
    "widths": widths_trial,
    "quermass": quermass_trial,
    "radii": radii_trial,
    "sections": sections_trial,
    "entropy": entropy_trial,
    "isoconst": isoconst_trial,
    "tails": tails_trial,
}


def scaling_trial(cfg: ExperimentConfig, trial: int) -> Dict[int, List[ResultRow]]:
    """
    One nested draw over the N-grid: K_N uses the first N points of a single
    sample of max(N) points, and every N shares the sphere and frame streams.
    """
    stream = Stream(cfg.seed).child("scaling", "trial", trial)
    grid = sorted(cfg.N)
    points = sample(distribution_for(cfg), grid[-1], stream.child("points"))
    b = cfg.budgets
    out = {}
    for N in grid:
        K = VertexPolytope(points[:N])
        profile = quermass_profile(K, cfg.k, b.subspaces, stream.child("quermass"))
        rows = [_row(trial, "Q_k", est, b.subspaces, k=k) for k, est in sorted(profile.items())]
        rows.append(_row(trial, "mean_width", mean_width(K, b.sphere, stream.child("mean_width")),
                         b.sphere))
        rows.append(_exact(trial, "R", K.radius, stream))
        out[N] = rows
    return out
