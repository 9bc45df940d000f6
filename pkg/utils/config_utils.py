"""
Random polytope lab - experiment configuration

An experiment is described by one JSON document mirroring ExperimentConfig:

    {
        "experiment": "widths",
        "distribution": "gaussian",
        "n": 16,
        "N": 256,
        "k": [1, 2, 3],
        "q": [2],
        "t": [1, 2, 4, 8],
        "trials": 5,
        "budgets": {"sphere": 10000, "subspaces": 200},
        "seed": 1
    }

`N` may be a single integer or an N-grid. CLI flags override file values
(`--seed`, `--out`, `--workers`, `--budget-scale`). The default output root
is $RANDPOLY_OUT, falling back to ./runs.

Functions:
    load_config(path):                   Read and validate a JSON config
    config_from_dict(data):              Build a config from a plain dict
    apply_overrides(cfg, ...):           Apply CLI flags, revalidate
    validate(cfg):                       Raise ConfigError on the first bad field
    config_hash(cfg):                    SHA-256 of the canonical CBOR encoding
    default_out_root():                  $RANDPOLY_OUT or ./runs
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional

from randpoly.errors import ConfigError
from randpoly.functionals import MIN_DIRECTIONS
from randpoly.measures import FAMILIES
from utils.crypto_utils import canonical_bytes, sha256_hex

EXPERIMENTS = ("widths", "quermass", "radii", "sections", "entropy", "isoconst", "verify", "tails")
OUT_ENV = "RANDPOLY_OUT"
BUDGET_FLOORS = {"directions": MIN_DIRECTIONS}


@dataclass(frozen=True)
class Budgets:
    """Monte-Carlo budgets shared by every functional of an experiment."""
    sphere: int = 10_000
    subspaces: int = 200
    directions: int = 500
    volume: int = 100_000
    interior: int = 20_000
    pool: int = 4096

    def scaled(self, factor: float) -> "Budgets":
        return Budgets(**{f.name: max(BUDGET_FLOORS.get(f.name, 1),
                                      int(round(getattr(self, f.name) * factor)))
                          for f in fields(self)})


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    distribution: str = "gaussian"
    n: int = 8
    N: List[int] = field(default_factory=lambda: [64])
    k: List[int] = field(default_factory=lambda: [1])
    q: List[float] = field(default_factory=lambda: [2.0])
    t: List[float] = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    trials: int = 5
    budgets: Budgets = field(default_factory=Budgets)
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1

    @property
    def out_dir(self) -> Path:
        return Path(self.out) if self.out else default_out_root()

    def as_dict(self) -> dict:
        """Plain dict of the inputs that determine the results."""
        data = asdict(self)
        # output location and worker count do not change any value
        data.pop("out")
        data.pop("workers")
        return data


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV) or "./runs")


def _as_list(value, cast, name: str) -> list:
    items = value if isinstance(value, (list, tuple)) else [value]
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number or a list of numbers, got {value!r}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown field")
    if "experiment" not in data:
        raise ConfigError("experiment", "missing")
    values = dict(data)
    budget_data = values.pop("budgets", {}) or {}
    budget_known = {f.name for f in fields(Budgets)}
    for key in budget_data:
        if key not in budget_known:
            raise ConfigError(f"budgets.{key}", "unknown budget")
    try:
        budgets = Budgets(**{k: int(v) for k, v in budget_data.items()})
    except (TypeError, ValueError):
        raise ConfigError("budgets", "budgets must be integers") from None
    for name, cast in (("N", int), ("k", int), ("q", float), ("t", float)):
        if name in values:
            values[name] = _as_list(values[name], cast, name)
    for name in ("n", "trials", "seed", "workers"):
        if name in values:
            try:
                values[name] = int(values[name])
            except (TypeError, ValueError):
                raise ConfigError(name, f"expected an integer, got {values[name]!r}") from None
    cfg = ExperimentConfig(budgets=budgets, **values)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"{path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return config_from_dict(data)


def validate(cfg: ExperimentConfig):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"{cfg.experiment!r} is not one of {', '.join(EXPERIMENTS)}")
    if cfg.distribution not in FAMILIES:
        raise ConfigError("distribution", f"{cfg.distribution!r} is not one of {', '.join(FAMILIES)}")
    if cfg.n < 2:
        raise ConfigError("n", f"need n >= 2, got {cfg.n}")
    if not cfg.N:
        raise ConfigError("N", "empty N-grid")
    for N in cfg.N:
        if N < cfg.n:
            raise ConfigError("N", f"N={N} < n={cfg.n}; random polytopes are built for N >= n")
    for k in cfg.k:
        if not 1 <= k <= cfg.n:
            raise ConfigError("k", f"k={k} outside [1, n={cfg.n}]")
    for q in cfg.q:
        if q < 1:
            raise ConfigError("q", f"q={q} < 1")
    for t in cfg.t:
        if t <= 0:
            raise ConfigError("t", f"t={t} must be positive")
    if cfg.trials < 1:
        raise ConfigError("trials", f"need trials >= 1, got {cfg.trials}")
    if cfg.workers < 1:
        raise ConfigError("workers", f"need workers >= 1, got {cfg.workers}")
    for f in fields(Budgets):
        floor = BUDGET_FLOORS.get(f.name, 1)
        if getattr(cfg.budgets, f.name) < floor:
            raise ConfigError(f"budgets.{f.name}", f"budgets.{f.name} must be >= {floor}")


def apply_overrides(cfg: ExperimentConfig, seed: Optional[int] = None, out: Optional[str] = None,
                    workers: Optional[int] = None,
                    budget_scale: Optional[float] = None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["seed"] = int(seed)
    if out is not None:
        changes["out"] = str(out)
    if workers is not None:
        changes["workers"] = int(workers)
    if budget_scale is not None:
        if budget_scale <= 0:
            raise ConfigError("budget_scale", "must be positive")
        changes["budgets"] = cfg.budgets.scaled(budget_scale)
    cfg = replace(cfg, **changes)
    validate(cfg)
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    return sha256_hex(canonical_bytes(cfg.as_dict()))
