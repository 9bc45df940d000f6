"""
Random polytope lab - counter-based random streams

Every Monte-Carlo quantity draws from a Stream: a numpy Generator over the
counter-based Philox bit generator, keyed by the SHA-256 of the canonical
encoding of (seed, *labels). Substreams are derived by appending labels, so
the numbers a task sees depend only on its label path, never on the order
in which tasks are scheduled.

Functions:
    Stream(seed, labels):     Keyed random stream
    Stream.child(*labels):    Derive an independent substream
    Stream.generator:         The numpy Generator (created lazily)
    Stream.provenance:        "seed=7/widths/N/64/trial/3" style label path
    as_stream(rng):           Accept a Stream, an int seed or None

Label path convention used by the harness:

| Position | Meaning          | Example        |
|----------|------------------|----------------|
| seed     | run seed         | seed=7         |
| 1        | experiment       | quermass       |
| 2-3      | generator count  | N/256          |
| 4-5      | trial            | trial/3        |
| 6...     | functional       | Q_k/2          |
"""
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from utils.crypto_utils import canonical_bytes, sha256


@dataclass(frozen=True)
class Stream:
    """Keyed Philox stream. Cheap to create; the Generator is lazy."""
    seed: int
    labels: Tuple[str, ...] = ()
    _state: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def key(self) -> np.ndarray:
        digest = sha256(canonical_bytes([int(self.seed), *self.labels]))
        return np.frombuffer(digest[:16], dtype=np.uint64).copy()

    @property
    def generator(self) -> np.random.Generator:
        gen = self._state.get("gen")
        if gen is None:
            gen = np.random.Generator(np.random.Philox(key=self.key))
            self._state["gen"] = gen
        return gen

    def child(self, *labels) -> "Stream":
        return Stream(self.seed, self.labels + tuple(str(x) for x in labels))

    @property
    def provenance(self) -> str:
        return "/".join([f"seed={self.seed}", *self.labels])


def as_stream(rng: Union[Stream, int, None]) -> Stream:
    """Normalize the rng argument accepted by library functions."""
    if isinstance(rng, Stream):
        return rng
    if rng is None:
        return Stream(0)
    return Stream(int(rng))
