from __future__ import annotations

import math

import numpy as np

from ..streams import as_generator


class EvaluationSample:
    """A fixed sample of ``xi`` reused for every objective estimate."""

    def __init__(self, problem, eval_stream, n_eval):
        if n_eval < 2:
            raise ValueError("n_eval must be >= 2")
        self.problem = problem
        self.xis = problem.sample_batch(as_generator(eval_stream), n_eval)

    def estimate(self, x):
        """``(mean, half_ci)`` of ``F(x, xi) + h(x)`` with ``half_ci = 1.96 std / sqrt(N)``."""
        if self.problem.noiseless:
            return float(self.problem.F(x, self.xis[0]) + self.problem.h(x)), 0.0
        vals = self.problem.F_batch(x, self.xis)
        n = len(vals)
        std = float(np.std(vals, ddof=1))
        return float(np.mean(vals)) + self.problem.h(x), 1.96 * std / math.sqrt(n)


def estimate_objective(problem, x, eval_stream, n_eval=1000):
    """Sample-average estimate of ``phi(x)`` on the stream's first ``n_eval`` draws."""
    return EvaluationSample(problem, eval_stream, n_eval).estimate(x)
