"""
Random polytope lab - run manifests

A run directory holds one CSV per experiment and a `manifest.json` written
last. The manifest records what produced the files and their SHA-256
digests, so a rerun with the same config can be compared digest for digest.
It is written to a temporary file and renamed into place; an interrupted run
leaves no manifest behind.

An optional Ed25519 signature covers the canonical CBOR encoding of every
manifest field except the signature itself.

Functions:
    start_manifest(cfg):                   New manifest with start timestamp
    finish_manifest(m, files, key):        Digests, end timestamp, signature
    write_manifest(run_dir, m):            Atomic write of manifest.json
    read_manifest(run_dir):                Load manifest.json
    verify_manifest(run_dir, m):           List of problems (empty if intact)

Manifest fields:

| Field       | Meaning                                         |
|-------------|-------------------------------------------------|
| config_hash | SHA-256 of the canonical config encoding        |
| config      | the config itself                               |
| seed        | root seed                                       |
| version     | randpoly version                                |
| started     | unix time the run started                       |
| finished    | unix time the last file was written             |
| digests     | file name -> SHA-256 hex                        |
| complete    | false if any trial failed                       |
| signature   | Ed25519 signature hex (optional)                |
| public_key  | Ed25519 public key hex (optional)               |
"""
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from randpoly import __version__
from utils.config_utils import ExperimentConfig, config_hash
from utils.crypto_utils import canonical_bytes, file_digest, sign, verify_signature

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    config_hash: str
    config: dict
    seed: int
    version: str
    started: float
    finished: Optional[float] = None
    digests: Dict[str, str] = field(default_factory=dict)
    complete: bool = False
    signature: Optional[str] = None
    public_key: Optional[str] = None

    def body(self) -> bytes:
        """Canonical bytes covered by the signature."""
        data = asdict(self)
        data.pop("signature")
        return canonical_bytes(data)


def start_manifest(cfg: ExperimentConfig) -> RunManifest:
    return RunManifest(config_hash(cfg), cfg.as_dict(), cfg.seed, __version__, time.time())


def finish_manifest(manifest: RunManifest, files: Iterable[Path], complete: bool = True,
                    private_key=None) -> RunManifest:
    digests = {Path(p).name: file_digest(p) for p in sorted(files, key=lambda p: Path(p).name)}
    manifest = replace(manifest, finished=time.time(), digests=digests, complete=complete)
    if private_key is not None:
        _, public = sign(private_key, b"")
        manifest = replace(manifest, public_key=public)
        signature, _ = sign(private_key, manifest.body())
        manifest = replace(manifest, signature=signature)
    return manifest


def write_manifest(run_dir, manifest: RunManifest) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    target = run_dir / MANIFEST_NAME
    fd, tmp = tempfile.mkstemp(dir=run_dir, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return target


def read_manifest(run_dir) -> RunManifest:
    data = json.loads((Path(run_dir) / MANIFEST_NAME).read_text())
    return RunManifest(**data)


def verify_manifest(run_dir, manifest: RunManifest) -> List[str]:
    """Problems found: missing or changed files, bad signature, incomplete run."""
    run_dir = Path(run_dir)
    problems = []
    for name, digest in sorted(manifest.digests.items()):
        path = run_dir / name
        if not path.exists():
            problems.append(f"{name}: missing")
        elif file_digest(path) != digest:
            problems.append(f"{name}: digest mismatch")
    if manifest.signature is not None:
        if manifest.public_key is None or not verify_signature(
                manifest.public_key, manifest.signature, manifest.body()):
            problems.append("signature does not verify")
    if not manifest.complete:
        problems.append("run marked incomplete")
    return problems
