"""Noiseless test problems with known optima."""

from __future__ import annotations

import numpy as np

from ..prox import simplex_indicator
from .base import CompositeProblem


class DeterministicQuadratic(CompositeProblem):
    """``f(x) = ||x - z||^2 / 2`` with a deterministic oracle.

    The optimum over ``dom h`` is the projection ``P(z)``, so the reference
    pair is ``(P(z), ||P(z) - z||^2 / 2)``. Samples are empty arrays.
    """

    noiseless = True

    def __init__(self, z, prox_op):
        self.z = np.asarray(z, dtype=float)
        self.dim = self.z.shape[0]
        self.prox_op = prox_op
        x_star = prox_op.project(self.z)
        self.reference_opt = (x_star, 0.5 * float((x_star - self.z) @ (x_star - self.z)))
        D = prox_op.diameter
        # ||x - z|| <= ||x - P(z)|| + ||P(z) - z|| <= D + ||P(z) - z||
        self.M = float(D + np.linalg.norm(x_star - self.z)) if np.isfinite(D) else np.inf
        self.name = f"quadratic(n={self.dim})"

    def sample(self, rng):
        return np.empty(0)

    def sample_batch(self, rng, size):
        return np.empty((size, 0))

    def oracle(self, x, xi):
        d = np.asarray(x, dtype=float) - self.z
        return 0.5 * float(d @ d), d

    def F_batch(self, x, xis):
        d = np.asarray(x, dtype=float) - self.z
        return np.full(len(xis), 0.5 * float(d @ d))

    def exact_phi(self, x):
        d = np.asarray(x, dtype=float) - self.z
        return 0.5 * float(d @ d) + self.h(x)

    def random_feasible(self, rng, size=None):
        if self.prox_op.name.startswith("simplex"):
            return rng.dirichlet(np.ones(self.dim), size=size)
        raise NotImplementedError("random_feasible only for simplex domains")


def make_deterministic_quadratic(n, z, prox_op=None):
    prox_op = prox_op if prox_op is not None else simplex_indicator(n)
    z = np.asarray(z, dtype=float)
    if z.shape != (n,):
        raise ValueError(f"z must have shape ({n},)")
    return DeterministicQuadratic(z, prox_op)
