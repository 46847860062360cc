"""Counter-based random streams.

A stream is identified by ``(seed, index)``; the Philox key is derived from
both, so streams for different path indices never overlap and a path can be
regenerated on any worker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeededStream:
    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "SeededStream":
        return SeededStream(self.seed, index)


def as_stream(stream) -> SeededStream:
    if isinstance(stream, SeededStream):
        return stream
    return SeededStream(int(stream))
