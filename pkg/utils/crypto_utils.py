"""
Random polytope lab - hashing and signing utilities

Provides canonical encoding, SHA-256 digests and Ed25519 signatures used
for stream keys, config hashes and run manifests.

Canonical encoding is CBOR with canonical=True, so two equal dicts always
hash the same regardless of key insertion order.

Functions:
    canonical_bytes(obj):            Canonical CBOR encoding of obj
    sha256(data):                    Raw 32-byte SHA-256 digest
    sha256_hex(data):                Hex SHA-256 digest
    file_digest(path):               Hex SHA-256 digest of a file
    load_private_key(key):           Signing key from base64 text or a key file
    sign(private_key, data):         Sign data, return (signature, public key)
    verify_signature(pub, sig, data): Check an Ed25519 signature
"""
import base64
import binascii
from pathlib import Path

import cbor2
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from randpoly.errors import ConfigError


def canonical_bytes(obj) -> bytes:
    """Canonical CBOR encoding (sorted keys, shortest floats)."""
    return cbor2.dumps(obj, canonical=True)


def sha256(data: bytes) -> bytes:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize()


def sha256_hex(data: bytes) -> str:
    return sha256(data).hex()


def file_digest(path) -> str:
    """SHA-256 of a file, read in 1 MiB chunks."""
    digest = hashes.Hash(hashes.SHA256())
    with open(Path(path), "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.finalize().hex()


def load_private_key(key: str) -> Ed25519PrivateKey:
    """
    Manifest signing key from `--sign-key`: a base64 Ed25519 key, or the path
    of a file holding one. 64-byte keys (seed + public half) keep the seed.
    """
    path = Path(key)
    text = path.read_text().strip() if path.is_file() else key.strip()
    try:
        raw = base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError):
        raise ConfigError("sign_key", "not valid base64") from None
    if len(raw) not in (32, 64):
        raise ConfigError("sign_key", f"expected a 32 or 64 byte key, got {len(raw)} bytes")
    return Ed25519PrivateKey.from_private_bytes(raw[:32])


def sign(private_key: Ed25519PrivateKey, data: bytes) -> tuple:
    """Sign data; returns (signature_hex, public_key_hex)."""
    signature = private_key.sign(data)
    public = private_key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    return signature.hex(), public.hex()


def verify_signature(public_hex: str, signature_hex: str, data: bytes) -> bool:
    public = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_hex))
    try:
        public.verify(bytes.fromhex(signature_hex), data)
    except InvalidSignature:
        return False
    return True
