"""
Random polytope lab - inclusion study

For every trial and every q, the empirical inclusion constant

    c(q) = min over 1000 directions of h_{K_N}(theta) / h_{Z_q}(theta)

and, across trials, the share of trials with c(q) above a fixed threshold.

Functions:
    inclusion_study(cfg):       InclusionReport per q, and the CSV
    print_inclusion(reports):   Summary in the CLI layout
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from commands.experiments import inclusion_trial
from commands.run import csv_name, map_trials, run_dir_for
from randpoly.errors import RandpolyError
from utils.config_utils import ExperimentConfig
from utils.io_utils import write_rows
from utils.manifest_utils import MANIFEST_NAME, finish_manifest, start_manifest, write_manifest

# Threshold for c(q) at q = log(N/n); cube, n=30, N=3000.
INCLUSION_THRESHOLD = 0.05


@dataclass(frozen=True)
class InclusionReport:
    q: float
    N: int
    constants: np.ndarray
    threshold: float = INCLUSION_THRESHOLD

    @property
    def fraction_above(self) -> float:
        return float(np.mean(self.constants > self.threshold))

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.constants > 0))

    def quantiles(self, qs=(0.05, 0.5, 0.95)) -> Dict[float, float]:
        return {float(p): float(np.quantile(self.constants, p)) for p in qs}


def _job(job):
    cfg, N, trial = job
    return inclusion_trial(cfg, N, trial)


def inclusion_study(cfg: ExperimentConfig, write: bool = True,
                    threshold: float = INCLUSION_THRESHOLD) -> Dict[float, InclusionReport]:
    """Reports keyed by q, for the last N of the grid."""
    reports = {}
    run_dir: Optional[Path] = run_dir_for(cfg, "inclusion") if write else None
    files = []
    if run_dir:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / MANIFEST_NAME).unlink(missing_ok=True)
    manifest = start_manifest(cfg)
    for N in cfg.N:
        jobs = [(cfg, N, trial) for trial in range(cfg.trials)]
        rows = [row for trial_rows in map_trials(_job, jobs, cfg.workers) for row in trial_rows]
        for q in cfg.q:
            constants = np.array([r.value for r in rows if r.q == q])
            if constants.size == 0:
                raise RandpolyError(f"no inclusion constants for q={q}")
            reports[q] = InclusionReport(q, N, constants, threshold)
        if run_dir:
            path = run_dir / csv_name("inclusion", N, cfg.N)
            write_rows(path, rows)
            files.append(path)
    if run_dir:
        write_manifest(run_dir, finish_manifest(manifest, files))
    return reports


def print_inclusion(reports: Dict[float, InclusionReport]):
    print("\n" + "=" * 50)
    print("   Inclusion K_N >= c Z_q")
    print("=" * 50)
    for q, report in sorted(reports.items()):
        qs = report.quantiles()
        print(f"\n   q = {q:g} (N={report.N}, {report.constants.size} trials)")
        print(f"      min c:          {report.constants.min():.4f}")
        print(f"      median c:       {qs[0.5]:.4f}")
        print(f"      c > {report.threshold:g}:       {report.fraction_above:.0%}")
        print(f"      all positive:   {report.all_positive}")
    print()
