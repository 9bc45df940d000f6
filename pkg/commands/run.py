"""
Random polytope lab - run command

Runs one experiment: trials are mapped over a process pool, gathered back in
trial order and written by this process only, then the manifest is written
last. A failed trial is logged, its rows are dropped and the manifest is
marked incomplete.

Output layout:

    <out>/<experiment>-<config hash[:12]>/
        <experiment>.csv            (single N)
        <experiment>-N<N>.csv       (one file per N on an N-grid)
        manifest.json

Functions:
    map_trials(fn, jobs, workers):   Ordered map, in-process or over a pool
    run_dir_for(cfg):                Output directory of a config
    csv_name(experiment, N, grid):   File name for one N
    run_experiment(cfg, key):        Run, write CSVs and manifest
    print_run(cfg, manifest, dir):   Summary in the CLI layout
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from commands.experiments import TRIALS
from randpoly.errors import ConfigError, RandpolyError
from utils.config_utils import ExperimentConfig, config_hash
from utils.io_utils import ResultRow, write_rows
from utils.manifest_utils import (
    MANIFEST_NAME,
    RunManifest,
    finish_manifest,
    start_manifest,
    write_manifest,
)

log = logging.getLogger(__name__)


def map_trials(fn: Callable, jobs: Sequence, workers: int = 1) -> list:
    """Results in job order whatever the worker count."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _guarded(job) -> Tuple[List[ResultRow], Optional[str]]:
    cfg, N, trial = job
    try:
        return TRIALS[cfg.experiment](cfg, N, trial), None
    except RandpolyError as exc:
        return [], f"trial {trial} (N={N}): {exc}"


def run_dir_for(cfg: ExperimentConfig, label: Optional[str] = None) -> Path:
    return cfg.out_dir / f"{label or cfg.experiment}-{config_hash(cfg)[:12]}"


def csv_name(experiment: str, N: int, grid: Sequence[int]) -> str:
    return f"{experiment}.csv" if len(grid) == 1 else f"{experiment}-N{N}.csv"


def run_experiment(cfg: ExperimentConfig, private_key=None) -> Tuple[RunManifest, Path]:
    if cfg.experiment not in TRIALS:
        raise ConfigError("experiment", f"{cfg.experiment!r} is not a trial experiment")
    run_dir = run_dir_for(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    # a stale manifest would vouch for files this run is about to replace
    (run_dir / MANIFEST_NAME).unlink(missing_ok=True)
    manifest = start_manifest(cfg)
    files, complete = [], True
    for N in cfg.N:
        jobs = [(cfg, N, trial) for trial in range(cfg.trials)]
        rows = []
        for trial_rows, error in map_trials(_guarded, jobs, cfg.workers):
            if error:
                log.warning("%s failed: %s", cfg.experiment, error)
                complete = False
            rows.extend(trial_rows)
        path = run_dir / csv_name(cfg.experiment, N, cfg.N)
        write_rows(path, rows)
        files.append(path)
        log.debug("wrote %d rows to %s", len(rows), path)
    manifest = finish_manifest(manifest, files, complete, private_key)
    write_manifest(run_dir, manifest)
    return manifest, run_dir


def print_run(cfg: ExperimentConfig, manifest: RunManifest, run_dir: Path):
    print("\n" + "=" * 50)
    print(f"   Run: {cfg.experiment}")
    print("=" * 50)
    print(f"   Distribution:  {cfg.distribution} (n={cfg.n})")
    print(f"   N:             {', '.join(str(N) for N in cfg.N)}")
    print(f"   Trials:        {cfg.trials}")
    print(f"   Seed:          {cfg.seed}")
    print(f"   Config hash:   {manifest.config_hash[:16]}...")
    print(f"   Output:        {run_dir}")
    print(f"   Complete:      {manifest.complete}")
    if manifest.signature:
        print(f"   Signed by:     {manifest.public_key[:16]}...")
    print("\n   Files:")
    for name, digest in manifest.digests.items():
        print(f"      {name:<28} {digest[:16]}")
    print()
