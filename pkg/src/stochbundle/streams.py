"""Reproducible, independent random streams.

A stream is identified by ``(base_seed, stream_id)``; the id packs a role
(instance generation, algorithm sampling, evaluation sample), a trial index
and a method index, so streams of different roles can never coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INSTANCE, ALGORITHM, EVALUATION = 0, 1, 2
ROLES = {"instance": INSTANCE, "algorithm": ALGORITHM, "evaluation": EVALUATION}


def stream_id(role, trial=0, method=0):
    if not (0 <= role < 2**8 and 0 <= trial < 2**28 and 0 <= method < 2**28):
        raise ValueError("stream id component out of range")
    return (role << 56) | (trial << 28) | method


@dataclass(frozen=True)
class SampleStream:
    base_seed: int
    stream_id: int

    @classmethod
    def derive(cls, base_seed, role, trial=0, method=0):
        return cls(int(base_seed), stream_id(role, trial, method))

    @property
    def role(self):
        return self.stream_id >> 56

    def generator(self):
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.base_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng):
    """Accept a :class:`SampleStream`, a numpy Generator or an int seed."""
    if isinstance(rng, SampleStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
