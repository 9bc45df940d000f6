#!/usr/bin/env python3
"""
Random Polytope Lab

Desk-scale experiments on random symmetric polytopes
K_N = conv{+-x_1, ..., +-x_N} with vertices drawn from isotropic log-concave
distributions: widths, quermassintegrals, radii, sections, covering numbers
and isotropic constants, each written as long-format CSV with a manifest.

Run flow:
    1. Load the JSON config and apply CLI overrides
    2. Map trials over worker processes, each on its own substream
    3. Gather rows in trial order and write one CSV per experiment and N
    4. Write manifest.json last (digests, optional Ed25519 signature)
"""

import argparse
import sys

try:
    import numpy  # noqa: F401
    import scipy  # noqa: F401
except ImportError:
    sys.exit("pip install numpy scipy")

try:
    import cbor2  # noqa: F401
except ImportError:
    sys.exit("pip install cbor2")

try:
    import cryptography  # noqa: F401
except ImportError:
    sys.exit("pip install cryptography")

from commands.inclusion import inclusion_study, print_inclusion
from commands.report import print_report, summarize
from commands.run import print_run, run_experiment
from commands.sample import export_polytope
from commands.scaling import print_scaling, scaling_study
from commands.verify import print_checks, run_checks
from randpoly.errors import RandpolyError
from randpoly.measures import FAMILIES
from utils.config_utils import apply_overrides, load_config
from utils.crypto_utils import load_private_key
from utils.log_utils import setup_logging


HELP_TEXT = """
Commands:
   Experiments:
      run --config <file>          Run the configured experiment
      scaling --config <file>      Fit Q_k, w against sqrt(log N) over the N-grid
      inclusion --config <file>    Empirical K_N >= c Z_q constants across trials

   Checks:
      verify [--only a,b]          Acceptance checks; exit 0 iff all pass

   Files:
      report <run dir>             Verify digests/signature, summarize CSVs
      sample --distribution <d> --n <n> --N <N> --path <file>
                                   Export one K_N as a point cloud

   Common flags:
      --seed <int>                 Override the config seed
      --out <dir>                  Output root (default $RANDPOLY_OUT or ./runs)
      --workers <int>              Worker processes over trials
      --budget-scale <x>           Multiply every MC budget (floor 1)

Experiments (config "experiment" field):
   widths, quermass, radii, sections, entropy, isoconst, tails, verify
"""


def _add_overrides(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="Root seed")
    p.add_argument("--out", help="Output root directory")
    p.add_argument("--workers", type=int, help="Worker processes")
    p.add_argument("--budget-scale", type=float, help="Multiply every MC budget")


def _config(args):
    cfg = load_config(args.config)
    return apply_overrides(cfg, args.seed, args.out, args.workers, args.budget_scale)


def _verify(only, budget_scale, seed) -> int:
    results = run_checks(only, budget_scale or 1.0, seed or 0)
    print_checks(results)
    return 0 if all(r.passed for r in results) else 1


def cmd_run(args) -> int:
    cfg = _config(args)
    if cfg.experiment == "verify":
        return _verify(None, args.budget_scale, cfg.seed)
    key = load_private_key(args.sign_key) if args.sign_key else None
    manifest, run_dir = run_experiment(cfg, key)
    print_run(cfg, manifest, run_dir)
    return 0 if manifest.complete else 1


def cmd_verify(args) -> int:
    only = [name.strip() for name in args.only.split(",")] if args.only else None
    return _verify(only, args.budget_scale, args.seed)


def cmd_scaling(args) -> int:
    print_scaling(scaling_study(_config(args)))
    return 0


def cmd_inclusion(args) -> int:
    print_inclusion(inclusion_study(_config(args)))
    return 0


def cmd_report(args) -> int:
    manifest, problems, summary = summarize(args.run_dir)
    print_report(args.run_dir, manifest, problems, summary)
    return 0 if not problems else 1


def cmd_sample(args) -> int:
    export_polytope(args.path, args.distribution, args.n, args.N, args.seed or 0)
    return 0


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "inclusion": cmd_inclusion,
    "report": cmd_report,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Random symmetric polytope laboratory",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=HELP_TEXT + """
Examples:
    python main.py run --config configs/widths.json --workers 4
    python main.py verify --only oracles,dirichlet --budget-scale 0.1
    python main.py report runs/widths-0123456789ab
    python main.py sample --distribution cube --n 8 --N 256 --path k.txt --seed 11
"""
    )
    parser.add_argument("--debug", action="store_true",
                        help="Enable debug output")
    parser.add_argument("--timestamp", action="store_true",
                        help="Show timestamps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Run an experiment")
    _add_overrides(p)
    p.add_argument("--sign-key", help="Base64 Ed25519 private key, or a file holding one, to sign the manifest")

    p = sub.add_parser("verify", help="Run acceptance checks")
    _add_overrides(p, config=False)
    p.add_argument("--only", help="Comma-separated check names")

    p = sub.add_parser("scaling", help="Scaling study over an N-grid")
    _add_overrides(p)

    p = sub.add_parser("inclusion", help="Inclusion study over q")
    _add_overrides(p)

    p = sub.add_parser("report", help="Summarize a run directory")
    p.add_argument("run_dir", help="Directory holding manifest.json")

    p = sub.add_parser("sample", help="Export one random polytope")
    p.add_argument("--distribution", choices=FAMILIES, default="gaussian")
    p.add_argument("--n", type=int, required=True, help="Dimension")
    p.add_argument("--N", type=int, required=True, help="Number of generators")
    p.add_argument("--seed", type=int, help="Root seed")
    p.add_argument("--path", required=True, help="Output point-cloud file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.debug, args.timestamp)
    try:
        return COMMANDS[args.command](args)
    except RandpolyError as exc:
        print(f"   Error: {exc}")
        return 2
    except KeyboardInterrupt:
        print("\n   Interrupted; no manifest written.")
        return 130


if __name__ == "__main__":
    sys.exit(main())
