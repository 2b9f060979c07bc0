"""Deterministic, order-independent random streams.

A stream is identified by ``(master_seed, stream_index, sub)``. Its generator
is ``PCG64(SeedSequence(master_seed, spawn_key=(stream_index, *sub)))``, so
the variates depend only on that key and not on how many other streams are
alive or in which order they are consumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RandomStream", "SEED_SCHEME"]

SEED_SCHEME = "PCG64(SeedSequence(master_seed, spawn_key=(stream_index, *sub)))"

_MAX_SEED = 2**64


@dataclass(frozen=True)
class RandomStream:
    master_seed: int
    stream_index: int = 0
    sub: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.master_seed, (int, np.integer)) or not 0 <= self.master_seed < _MAX_SEED:
            raise ValueError(f"master_seed must be an integer in [0, 2**64), got {self.master_seed!r}")
        if not isinstance(self.stream_index, (int, np.integer)) or self.stream_index < 0:
            raise ValueError(f"stream_index must be a non-negative integer, got {self.stream_index!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "stream_index", int(self.stream_index))
        object.__setattr__(self, "sub", tuple(int(s) for s in self.sub))

    @property
    def key(self) -> tuple:
        return (self.stream_index, *self.sub)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, k: int) -> "RandomStream":
        """Independent sub-stream ``k`` of this stream."""
        if k < 0:
            raise ValueError("child index must be non-negative")
        return RandomStream(self.master_seed, self.stream_index, self.sub + (int(k),))

    def metadata(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "stream_index": self.stream_index,
            "sub": list(self.sub),
            "scheme": SEED_SCHEME,
        }
