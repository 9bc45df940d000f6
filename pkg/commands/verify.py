"""
Random polytope lab - acceptance checks

Each check recomputes one claim end to end from a fixed seed and returns a
CheckResult. `run_checks` runs them in order; the CLI exits 0 iff every
selected check passes. `--budget-scale` multiplies every trial count and MC
budget (floor 1) for quick smoke runs.

Checks:

| Name               | Claim                                                 |
|--------------------|-------------------------------------------------------|
| oracles            | cross/cube oracles match closed forms to 1e-9         |
| dirichlet          | simplex moments (1+delta)/(n(n+1)) within 1%          |
| facet_formula      | facet closed form vs MC within 1%; exact bound chain  |
| isotropic_constant | cube 1/sqrt12, affine, L/sqrt(log 2N/n) decreasing  |
| quermass           | Q_k / w (ball surrogate) = 1 +- 3%, Q_1 = w, monotone |
| scaling            | E Q_k vs sqrt(log N): R^2 >= 0.95, positive slope     |
| inclusion          | c(q) > 0.05 in >= 95% of trials                       |
| outer_radius       | R_k / (w + sqrt(k/n) R) in [0.25, 4]; max-form <= 5   |
| tails              | deviation, small-ball, small-norm and Bernstein       |
| entropy            | covering profile fitted_c <= 50; Sudakov fitted_c <= 50 |
| determinism        | reruns give byte-identical CSVs across worker counts  |

Functions:
    run_checks(only, budget_scale, seed):  List[CheckResult]
    print_checks(results):                 Table in the CLI layout
"""
import logging
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from commands.inclusion import INCLUSION_THRESHOLD, inclusion_study
from commands.run import run_experiment
from commands.scaling import fit_against, scaling_study
from randpoly.entropy import (
    covering_upper,
    fitted_constant,
    regularity_profile,
    sudakov_envelope,
)
from randpoly.errors import ConfigError, RandpolyError
from randpoly.functionals import (
    mean_width,
    outer_radius_envelope,
    outer_radius_Rk,
    quermass_profile,
)
from randpoly.geometry import sample_sphere_many
from randpoly.isoconst import (
    bernstein_check,
    dirichlet_second_moments,
    facet_second_moment,
    facet_second_moment_mc,
    isotropic_constant,
    kk_bound_pipeline,
)
from randpoly.measures import (
    MIN_TAIL_SAMPLE,
    fitted_envelope_constant,
    make_distribution,
    sample,
    small_norm_cdf,
    tail_probabilities,
)
from randpoly.polytope import (
    EuclideanBall,
    VertexPolytope,
    cross_polytope,
    cube_polytope,
    facets,
    gauge,
    linear_image,
    radial,
    random_polytope,
    support,
    volume_exact,
)
from utils.config_utils import Budgets, ExperimentConfig, load_config
from utils.rng_utils import Stream

log = logging.getLogger(__name__)

ISOCONST_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "isoconst.json"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


class _Budget:
    def __init__(self, scale: float):
        self.scale = scale

    def __call__(self, count: int, floor: int = 1) -> int:
        return max(floor, int(round(count * self.scale)))


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(b))


# -- exact geometry ---------------------------------------------------------

def check_oracles(budget: _Budget, stream: Stream) -> CheckResult:
    failures = []
    for n in (2, 3, 4):
        e1 = np.eye(n)[0]
        diag = np.ones(n) / np.sqrt(n)
        cross, cube = cross_polytope(n), cube_polytope(n)
        cases = [
            ("h_cross(e1)", support(cross, e1), 1.0),
            ("h_cross(diag)", support(cross, diag), 1.0 / np.sqrt(n)),
            ("h_cube(diag)", support(cube, diag), np.sqrt(n)),
            ("gauge_cross(1) lp", gauge(cross, np.ones(n), method="lp"), float(n)),
            ("gauge_cross(1) facets", gauge(cross, np.ones(n), method="facets"), float(n)),
            ("gauge_cube(1) lp", gauge(cube, np.ones(n), method="lp"), 1.0),
            ("r_cross(diag)", radial(cross, diag), 1.0 / np.sqrt(n)),
            ("r_cube(e1)", radial(cube, e1), 1.0),
            ("facets cross", len(facets(cross)), 2.0 ** n),
            ("vol cross", volume_exact(cross), 2.0 ** n / np.prod(np.arange(1, n + 1))),
            ("vol cube", volume_exact(cube), 2.0 ** n),
        ]
        for label, got, want in cases:
            if not _close(got, want, 1e-9):
                failures.append(f"n={n} {label}: {got!r} != {want!r}")
    passed = not failures
    return CheckResult("oracles", passed, "; ".join(failures) or "n in {2,3,4} exact")


def check_dirichlet(budget: _Budget, stream: Stream) -> CheckResult:
    samples = budget(1_000_000, 1000)
    worst = 0.0
    for n in (2, 3, 5):
        got = dirichlet_second_moments(n, samples, stream.child("n", n))
        want = (1.0 + np.eye(n)) / (n * (n + 1))
        worst = max(worst, float(np.max(np.abs(got / want - 1.0))))
    return CheckResult("dirichlet", worst <= 0.01, f"max relative error {worst:.4f}")


def check_facet_formula(budget: _Budget, stream: Stream) -> CheckResult:
    gen = stream.child("simplices").generator
    samples = budget(200_000, 1000)
    worst = 0.0
    for i in range(50):
        Y = gen.standard_normal((3, 3))
        exact = facet_second_moment(Y)
        mc = facet_second_moment_mc(Y, samples, stream.child("facet", i))
        worst = max(worst, abs(mc / exact - 1.0))
    gauss = {n: make_distribution("gaussian", n) for n in (2, 3, 4, 5)}
    violations = []
    for n, dist in gauss.items():
        for s in range(3):
            K = random_polytope(dist, 3 * n, stream.child("chain", n, s))
            report = kk_bound_pipeline(K, rng=stream.child("pipeline", n, s))
            violations.extend(f"n={n}: {v}" for v in report.chain_violations())
            if not report.facet_count_ok:
                violations.append(f"n={n}: facet count above binom(2N, n)")
    passed = worst <= 0.01 and not violations
    detail = f"max facet error {worst:.4f}"
    if violations:
        detail += "; " + "; ".join(violations)
    return CheckResult("facet_formula", passed, detail)


def _random_map(n: int, gen: np.random.Generator, condition: float = 10.0) -> np.ndarray:
    q1, _ = np.linalg.qr(gen.standard_normal((n, n)))
    q2, _ = np.linalg.qr(gen.standard_normal((n, n)))
    s = np.geomspace(1.0, condition, n)
    return q1 @ np.diag(s) @ q2


def check_isotropic_constant(budget: _Budget, stream: Stream) -> CheckResult:
    cube_L = isotropic_constant(cube_polytope(3, 0.5))
    ok_cube = abs(cube_L - 1.0 / np.sqrt(12.0)) <= 1e-6
    K = random_polytope(make_distribution("gaussian", 3), 12, stream.child("affine"))
    T = _random_map(3, stream.child("map").generator)
    L0 = isotropic_constant(K)
    drift = abs(isotropic_constant(linear_image(K, T)) / L0 - 1.0)
    trend = load_config(ISOCONST_CONFIG)
    grid = sorted(trend.N)
    dist = make_distribution(trend.distribution, trend.n)
    seeds = budget(trend.trials, 3)
    x = np.sqrt(np.log(2.0 * np.array(grid) / trend.n))
    ratios, ratio_se = [], []
    for N, scale in zip(grid, x):
        Ls = np.array([isotropic_constant(random_polytope(dist, N, stream.child("trend", N, s)))
                       for s in range(seeds)]) / scale
        ratios.append(float(Ls.mean()))
        ratio_se.append(float(Ls.std(ddof=1) / np.sqrt(seeds)))
    ratios, ratio_se = np.array(ratios), np.array(ratio_se)
    trend_c = float(np.max(ratios))
    # L / sqrt(log(2N/n)) must not grow along the grid
    joint = np.hypot(ratio_se[1:], ratio_se[:-1])
    monotone = bool(np.all(np.diff(ratios) <= 3.0 * joint))
    slope = fit_against(x, ratios).slope
    passed = ok_cube and drift <= 1e-8 and trend_c <= 3.0 and monotone and slope <= 0.0
    detail = (f"cube L={cube_L:.8f}; affine drift {drift:.1e}; fitted trend c={trend_c:.3f}; "
              f"ratio slope={slope:.4f}; ratios monotone={monotone}")
    return CheckResult("isotropic_constant", passed, detail)


# -- Monte-Carlo functionals ------------------------------------------------

def check_quermass(budget: _Budget, stream: Stream) -> CheckResult:
    n = 8
    K = VertexPolytope(sample_sphere_many(n, 4000, stream.child("surrogate")))
    profile = quermass_profile(K, (1, 2, 3, 4), budget(50, 5), stream.child("profile"))
    failures = []
    width = mean_width(K, budget(20_000, 100), stream.child("width"))
    q1 = profile[1]
    joint = np.hypot(q1.standard_error, width.standard_error)
    if abs(q1.value - width.value) > 3.0 * joint:
        failures.append(f"Q_1={q1.value:.4f} vs w={width.value:.4f}")
    # a finite hull falls short of the unit ball, so roundness is Q_k / w
    for k, est in profile.items():
        if abs(est.value / width.value - 1.0) > 0.03:
            failures.append(f"Q_{k}/w={est.value / width.value:.4f}")
    for k in (1, 2, 3):
        hi, lo = profile[k + 1], profile[k]
        if hi.value > lo.value + 3.0 * np.hypot(hi.standard_error, lo.standard_error):
            failures.append(f"Q_{k + 1} > Q_{k}")
    values = ", ".join(f"Q_{k}={e.value:.4f}" for k, e in sorted(profile.items()))
    return CheckResult("quermass", not failures, "; ".join(failures) or values)


def check_scaling(budget: _Budget, stream: Stream) -> CheckResult:
    failures, notes = [], []
    for name in ("gaussian", "cube"):
        cfg = ExperimentConfig(
            "quermass", name, n=32, N=[64, 256, 1024, 4096, 16384], k=[1, 2, 3],
            trials=budget(20, 2), budgets=Budgets(sphere=budget(2000, 100), subspaces=budget(50, 5)),
            seed=stream.seed,
        )
        report = scaling_study(cfg, write=False)
        for k in (1, 2, 3):
            fit = report.fits[f"Q_{k}"]
            notes.append(f"{name} Q_{k} R^2={fit.r_squared:.3f}")
            if fit.r_squared < 0.95 or fit.slope <= 0:
                failures.append(f"{name} Q_{k}: slope {fit.slope:.3f}, R^2 {fit.r_squared:.3f}")
        if not report.width_monotone:
            failures.append(f"{name}: w(K_N) not monotone in N")
        if name == "gaussian" and not np.all((report.radius_ratio >= 1) & (report.radius_ratio <= 3)):
            failures.append("gaussian R/sqrt(n) outside [1, 3]")
    return CheckResult("scaling", not failures, "; ".join(failures) or ", ".join(notes))


def check_inclusion(budget: _Budget, stream: Stream) -> CheckResult:
    cfg = ExperimentConfig("widths", "cube", n=30, N=[3000],
                           q=[float(np.log(100.0))], trials=budget(20, 2),
                           budgets=Budgets(volume=budget(100_000, 1000)), seed=stream.seed)
    report = next(iter(inclusion_study(cfg, write=False).values()))
    passed = report.fraction_above >= 0.95
    return CheckResult("inclusion", passed,
                       f"c > {INCLUSION_THRESHOLD:g} in {report.fraction_above:.0%} of trials; "
                       f"min c {report.constants.min():.4f}")


def outer_radius_ranks(n: int) -> Tuple[int, ...]:
    return 1, n // 4, n // 2, n


def check_outer_radius(budget: _Budget, stream: Stream) -> CheckResult:
    n, N = 16, 256
    dist = make_distribution("gaussian", n)
    ratios, upper, lower = [], [], []
    for i in range(budget(10, 2)):
        s = stream.child("polytope", i)
        K = random_polytope(dist, N, s)
        w = mean_width(K, budget(2000, 100), s.child("mean_width")).value
        for k in outer_radius_ranks(n):
            Rk = outer_radius_Rk(K, k, budget(50, 5), s.child("R_k", k)).value
            ratios.append(Rk / outer_radius_envelope(w, K.radius, k, n))
            scale = max(np.sqrt(k), np.sqrt(np.log(N)))
            upper.append(Rk / scale)
            lower.append(scale / Rk)
    ratios = np.array(ratios)
    c_up, c_low = float(np.max(upper)), float(np.max(lower))
    passed = bool(np.all((ratios >= 0.25) & (ratios <= 4.0))) and c_up <= 5 and c_low <= 5
    return CheckResult("outer_radius", passed,
                       f"ratio in [{ratios.min():.3f}, {ratios.max():.3f}]; "
                       f"fitted upper {c_up:.3f}, lower {c_low:.3f}")


def check_tails(budget: _Budget, stream: Stream) -> CheckResult:
    count = budget(MIN_TAIL_SAMPLE, MIN_TAIL_SAMPLE)
    notes, failures = [], []
    for n in (16, 25):
        for name in ("gaussian", "cube"):
            dist = make_distribution(name, n)
            pts = sample(dist, count, stream.child(name, n))
            rows = tail_probabilities(dist, n, (1.0, 1.25, 1.5), pts, (0.1, 0.2, 0.3), c3=2.0)
            for kind in ("deviation", "small-ball"):
                sel = [r for r in rows if r.kind == kind]
                c = fitted_envelope_constant([r.probability for r in sel], [r.envelope for r in sel])
                if c > 10:
                    failures.append(f"{name} n={n} {kind} fitted {c:.2f}")
            small_c = small_norm_cdf(pts, (0.01, 0.02, 0.05, 0.1, 0.2)).fitted_c
            if small_c > 10:
                failures.append(f"{name} n={n} small-norm fitted {small_c:.2f}")
    cube64 = make_distribution("cube", 64)
    bern = bernstein_check(cube64, np.full(64, 1.0 / 8.0), 1.0, (0.5, 1.0, 2.0, 3.0, 4.0),
                           count, stream.child("bernstein"))
    notes.append(f"Bernstein fitted c={bern.fitted_c:.3f}")
    if bern.fitted_c < 0.05:
        failures.append(f"Bernstein fitted c {bern.fitted_c:.3f} < 0.05")
    return CheckResult("tails", not failures, "; ".join(failures) or ", ".join(notes))


def check_entropy(budget: _Budget, stream: Stream) -> CheckResult:
    K = random_polytope(make_distribution("cube", 8), 256, stream.child("profile"))
    primal, dual = regularity_profile(K, (1.0, 2.0, 4.0, 8.0), {"pool": budget(4096, 64)},
                                      stream.child("entropy"))
    profile_c = float(max(np.max(primal.fitted_c), np.max(dual.fitted_c)))
    gauss = make_distribution("gaussian", 6)
    values, envelopes = [], []
    for i in range(budget(10, 2)):
        s = stream.child("sudakov", i)
        Ki = random_polytope(gauss, 64, s)
        w = mean_width(Ki, budget(2000, 100), s.child("mean_width")).value
        net = covering_upper(Ki, EuclideanBall(1.0, 6), 1.0, budget(1024, 64), s.child("net"))
        values.append(net.log_size)
        envelopes.append(sudakov_envelope(w, 6, 1.0))
    sudakov_c = fitted_constant(values, envelopes)
    passed = profile_c <= 50 and sudakov_c <= 50
    return CheckResult("entropy", passed,
                       f"profile fitted_c={profile_c:.3f}; Sudakov fitted_c={sudakov_c:.3f}")


def check_determinism(budget: _Budget, stream: Stream) -> CheckResult:
    digests = []
    for workers in (1, 2):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = ExperimentConfig("widths", "gaussian", n=4, N=[32], q=[2.0], trials=3,
                                   budgets=Budgets(sphere=budget(500, 100)), seed=stream.seed,
                                   out=tmp, workers=workers)
            manifest, _ = run_experiment(cfg)
            digests.append(manifest.digests)
    passed = digests[0] == digests[1]
    return CheckResult("determinism", passed,
                       "identical digests for 1 and 2 workers" if passed else "digests differ")


CHECKS: Dict[str, Callable[[_Budget, Stream], CheckResult]] = {
    "oracles": check_oracles,
    "dirichlet": check_dirichlet,
    "facet_formula": check_facet_formula,
    "isotropic_constant": check_isotropic_constant,
    "quermass": check_quermass,
    "scaling": check_scaling,
    "inclusion": check_inclusion,
    "outer_radius": check_outer_radius,
    "tails": check_tails,
    "entropy": check_entropy,
    "determinism": check_determinism,
}


def run_checks(only: Optional[Sequence[str]] = None, budget_scale: float = 1.0,
               seed: int = 0) -> List[CheckResult]:
    names = list(only) if only else list(CHECKS)
    for name in names:
        if name not in CHECKS:
            raise ConfigError("only", f"unknown check {name!r}; expected one of {', '.join(CHECKS)}")
    if budget_scale <= 0:
        raise ConfigError("budget_scale", "must be positive")
    budget = _Budget(budget_scale)
    results = []
    for name in names:
        start = time.time()
        try:
            result = CHECKS[name](budget, Stream(seed).child("verify", name))
        except RandpolyError as exc:
            result = CheckResult(name, False, f"error: {exc}")
        result = CheckResult(result.name, result.passed, result.detail, time.time() - start)
        log.debug("check %s finished in %.1fs", name, result.seconds)
        results.append(result)
    return results


def print_checks(results: List[CheckResult]):
    print("\n" + "=" * 60)
    print("   Acceptance checks")
    print("=" * 60)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"   [{status}] {r.name:<20} {r.seconds:7.1f}s  {r.detail}")
    passed = sum(r.passed for r in results)
    print(f"\n   {passed}/{len(results)} checks passed\n")
