"""
Random polytope lab - report command

Re-verifies a run directory (file digests, optional signature, complete
flag) and prints, per CSV and functional, the mean and standard error of
the value across trials.

Functions:
    summarize(run_dir):        (manifest, problems, summary rows)
    print_report(...):         Summary in the CLI layout
"""
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from utils.io_utils import read_rows
from utils.manifest_utils import RunManifest, read_manifest, verify_manifest


@dataclass(frozen=True)
class SummaryRow:
    file: str
    functional: str
    params: str
    trials: int
    mean: float
    stderr: float


def _params(record: dict) -> str:
    return " ".join(f"{key}={record[key]}" for key in ("k", "q", "t") if record.get(key))


def summarize(run_dir) -> Tuple[RunManifest, List[str], List[SummaryRow]]:
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    problems = verify_manifest(run_dir, manifest)
    summary = []
    for name in sorted(manifest.digests):
        path = run_dir / name
        if not path.exists():
            continue
        groups: Dict[Tuple[str, str], List[float]] = defaultdict(list)
        for record in read_rows(path):
            groups[(record["functional"], _params(record))].append(float(record["value"]))
        for (functional, params), values in groups.items():
            v = np.asarray(values)
            se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
            summary.append(SummaryRow(name, functional, params, v.size, float(v.mean()), se))
    return manifest, problems, summary


def print_report(run_dir, manifest: RunManifest, problems: List[str], summary: List[SummaryRow]):
    print("\n" + "=" * 60)
    print(f"   Report: {Path(run_dir).name}")
    print("=" * 60)
    print(f"   Config hash:   {manifest.config_hash[:16]}...")
    print(f"   Seed:          {manifest.seed}")
    print(f"   Version:       {manifest.version}")
    print(f"   Signed:        {manifest.signature is not None}")
    if problems:
        print("\n   Problems:")
        for problem in problems:
            print(f"      {problem}")
    else:
        print("   Integrity:     OK")
    current = None
    for row in summary:
        if row.file != current:
            current = row.file
            print(f"\n   {current}:")
        label = f"{row.functional} {row.params}".strip()
        print(f"      {label:<28} {row.mean:>12.6g} +- {row.stderr:<10.3g} ({row.trials} trials)")
    print()
