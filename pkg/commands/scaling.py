"""
Random polytope lab - scaling study

Fits trial means of Q_k(K_N), w(K_N) and R(K_N) over an N-grid:

    E Q_k(K_N)  and  w(K_N)   against sqrt(log N)
    R(K_N) / sqrt(n)          reported per N

Trials are nested in N (one sample of max N points per trial, K_N uses the
first N), so w(K_N) is nondecreasing in N within every trial.

Functions:
    fit_against(x, y):          LinearFit by least squares
    scaling_study(cfg):         ScalingReport and per-N CSVs
    print_scaling(report):      Fit table in the CLI layout
"""
from collections import defaultdict
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from commands.experiments import scaling_trial
from commands.run import csv_name, map_trials, run_dir_for
from randpoly.errors import ConfigError
from utils.config_utils import ExperimentConfig
from utils.io_utils import ResultRow, write_rows
from utils.manifest_utils import MANIFEST_NAME, finish_manifest, start_manifest, write_manifest


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class ScalingReport:
    N_grid: Tuple[int, ...]
    n: int
    means: Dict[str, np.ndarray]
    fits: Dict[str, LinearFit]
    width_monotone: bool
    run_dir: Optional[Path] = None

    @property
    def radius_ratio(self) -> np.ndarray:
        """Mean R(K_N) / sqrt(n) per N."""
        return self.means["R"] / np.sqrt(self.n)


def fit_against(x, y) -> LinearFit:
    result = stats.linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return LinearFit(float(result.slope), float(result.intercept), float(result.rvalue ** 2))


def _label(row: ResultRow) -> str:
    return f"Q_{row.k}" if row.functional == "Q_k" else row.functional


def _widths_nondecreasing(per_trial: List[Dict[int, List[ResultRow]]], grid) -> bool:
    for trial in per_trial:
        widths = [next(r.value for r in trial[N] if r.functional == "mean_width") for N in grid]
        if np.any(np.diff(widths) < -1e-12):
            return False
    return True


def scaling_study(cfg: ExperimentConfig, write: bool = True) -> ScalingReport:
    grid = tuple(sorted(cfg.N))
    if len(grid) < 3:
        raise ConfigError("N", "a scaling study needs an N-grid of at least 3 values")
    per_trial = map_trials(partial(scaling_trial, cfg), list(range(cfg.trials)), cfg.workers)
    values: Dict[str, Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for trial in per_trial:
        for N, rows in trial.items():
            for row in rows:
                values[_label(row)][N].append(row.value)
    means = {name: np.array([np.mean(by_n[N]) for N in grid]) for name, by_n in values.items()}
    x = np.sqrt(np.log(np.array(grid, dtype=float)))
    fits = {name: fit_against(x, y) for name, y in means.items() if name != "R"}
    run_dir = None
    if write:
        run_dir = run_dir_for(cfg, "scaling")
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / MANIFEST_NAME).unlink(missing_ok=True)
        manifest = start_manifest(cfg)
        files = []
        for N in grid:
            path = run_dir / csv_name("scaling", N, grid)
            write_rows(path, [row for trial in per_trial for row in trial[N]])
            files.append(path)
        write_manifest(run_dir, finish_manifest(manifest, files))
    return ScalingReport(grid, cfg.n, means, fits, _widths_nondecreasing(per_trial, grid), run_dir)


def print_scaling(report: ScalingReport):
    print("\n" + "=" * 50)
    print("   Scaling vs sqrt(log N)")
    print("=" * 50)
    print(f"   {'functional':<12} {'slope':>10} {'intercept':>10} {'R^2':>8}")
    for name, fit in sorted(report.fits.items()):
        print(f"   {name:<12} {fit.slope:>10.4f} {fit.intercept:>10.4f} {fit.r_squared:>8.4f}")
    print("\n   R(K_N)/sqrt(n):")
    for N, ratio in zip(report.N_grid, report.radius_ratio):
        print(f"      N={N:<8} {ratio:.4f}")
    print(f"\n   w(K_N) nondecreasing in N: {report.width_monotone}")
    if report.run_dir:
        print(f"   Output: {report.run_dir}")
    print()
