"""
Random polytope lab - file formats

Point clouds (polytope generators) are plain text:

    n N seed
    x_11 x_12 ... x_1n
    ...

Experiment results are long-format CSV, one file per experiment. Floats are
written with `.17g` so a rerun reproduces the file byte for byte.

Functions:
    write_points(path, points, seed):  Write a point cloud
    read_points(path):                 Read a point cloud -> (points, seed)
    format_float(x):                   Round-trip float formatting
    ResultRow(...):                    One CSV row
    write_rows(path, rows):            Write rows with the header
    read_rows(path):                   Read rows back as dicts

CSV columns:

| Column     | Meaning                                        |
|------------|------------------------------------------------|
| trial      | trial index                                    |
| functional | name, e.g. "Q_k", "mean_width", "R_k"          |
| k, q, t    | parameters (empty when not applicable)         |
| value      | point estimate                                 |
| stderr     | standard error (0 for exact values)            |
| budget     | sample / draw budget used                      |
| seed       | stream label path the value was drawn from     |
"""
import csv
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

CSV_COLUMNS = ("trial", "functional", "k", "q", "t", "value", "stderr", "budget", "seed")


def format_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_points(path, points, seed: int = 0):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    N, n = points.shape
    lines = [f"{n} {N} {int(seed)}"]
    lines.extend(" ".join(format_float(v) for v in row) for row in points)
    Path(path).write_text("\n".join(lines) + "\n")


def read_points(path):
    """Returns (points, seed); checks the header against the body."""
    text = Path(path).read_text().split("\n")
    rows = [line.split() for line in text if line.strip()]
    if not rows or len(rows[0]) != 3:
        raise ValueError(f"{path}: header must be 'n N seed'")
    n, N, seed = (int(v) for v in rows[0])
    body = rows[1:]
    if len(body) != N or any(len(r) != n for r in body):
        raise ValueError(f"{path}: expected {N} points of dimension {n}")
    return np.array([[float(v) for v in r] for r in body]).reshape(N, n), seed


@dataclass(frozen=True)
class ResultRow:
    trial: int
    functional: str
    value: float
    stderr: float = 0.0
    budget: int = 1
    seed: str = ""
    k: Optional[int] = None
    q: Optional[float] = None
    t: Optional[float] = None

    def as_record(self) -> List[str]:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        out = []
        for col in CSV_COLUMNS:
            v = values[col]
            out.append(v if isinstance(v, str) else format_float(v))
        return out


def write_rows(path, rows: Iterable[ResultRow]):
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_record())


def read_rows(path) -> List[dict]:
    with open(Path(path), newline="") as fh:
        return list(csv.DictReader(fh))
