"""Euclidean stochastic mirror descent (projected stochastic subgradient)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import IterateRecord, RunRecord
from .errors import InvalidArgumentError, UnsupportedProblemError
from .streams import ALGORITHM, SampleStream, as_generator


@dataclass(frozen=True)
class SmdConfig:
    """``N`` iterations with constant step ``theta_smd / sqrt(N)``."""

    N: int
    theta_smd: float = 1.0
    seed: int = 0
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError(f"N must be a positive integer, got {self.N}")
        if not self.theta_smd > 0:
            raise InvalidArgumentError("theta_smd must be positive")

    @property
    def step(self):
        return self.theta_smd / math.sqrt(self.N)


def run_smd(problem, config, rng=None, checkpoints=(), name="SMD"):
    """``x_{t+1} = P(x_t - gamma s(x_t, xi_t))`` for ``t = 0 .. N-1``.

    The returned solution ``y_avg`` is the average ``(1/N) sum_{t=1..N} x_t``.
    At every ``t`` in ``checkpoints`` (and at ``N``) an
    :class:`IterateRecord` with the running average over ``x_1 .. x_t``
    and the last iterate ``x_t`` is stored.
    """
    if not problem.prox_op.is_indicator:
        raise UnsupportedProblemError("SMD is only defined here for indicator h")
    if rng is None:
        rng = SampleStream.derive(config.seed, ALGORITHM)
    gen = as_generator(rng)
    project = problem.prox_op.project
    x = project(np.zeros(problem.dim)) if config.x0 is None else np.array(config.x0, dtype=float)
    if x.shape != (problem.dim,) or not math.isfinite(problem.h(x)):
        raise InvalidArgumentError("x0 must be a point of dom h with the problem dimension")
    gamma = config.step
    marks = {int(t) for t in checkpoints if 1 <= t <= config.N} | {config.N}
    total = np.zeros_like(x)
    record = RunRecord(method=name, y_avg=x.copy(), u_avg=math.nan, total_inner_iters=0)
    start = time.perf_counter()
    for t in range(1, config.N + 1):
        xi = problem.sample(gen)
        _, s = problem.oracle(x, xi)
        x = project(x - gamma * s)
        total += x
        if t in marks:
            record.iterates.append(
                IterateRecord(t=t, x_avg=total / t, x_last=x.copy(), wall_ms=1000.0 * (time.perf_counter() - start))
            )
    record.total_inner_iters = config.N
    record.wall_ms = 1000.0 * (time.perf_counter() - start)
    record.y_avg = total / config.N
    if problem.reference_opt is not None and problem.has_exact_phi:
        x_star, phi_star = problem.reference_opt
        record.known_gap = problem.exact_phi(record.y_avg) - phi_star
    return record
