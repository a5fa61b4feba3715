from __future__ import annotations

from typing import Optional

import numpy as np


class CompositeProblem:
    """Oracle bundle for ``min f(x) + h(x)`` with ``f(x) = E[F(x, xi)]``.

    Subclasses implement :meth:`sample` and :meth:`oracle`; the batched
    variants default to loops and should be overridden when a vectorized
    form exists, since objective estimation evaluates ``F`` on large
    fixed samples.

    Attributes
    ----------
    dim : int
    prox_op : ProxOperator
        Houses ``h``, its prox, ``M_h`` and ``D``.
    M : float
        Bound with ``E||s(x, xi)||^2 <= M^2`` on ``dom h``.
    reference_opt : tuple or None
        ``(x_star, phi_star)`` when an optimum is known.
    noiseless : bool
        True when ``F(x, xi) = f(x)`` for every sample.
    """

    dim: int
    prox_op = None
    M: float = np.nan
    reference_opt: Optional[tuple] = None
    noiseless: bool = False
    name: str = "problem"

    def sample(self, rng):
        raise NotImplementedError

    def sample_batch(self, rng, size):
        return np.stack([self.sample(rng) for _ in range(size)])

    def oracle(self, x, xi):
        """Return ``(F(x, xi), s(x, xi))``."""
        raise NotImplementedError

    def F(self, x, xi):
        return self.oracle(x, xi)[0]

    def s(self, x, xi):
        return self.oracle(x, xi)[1]

    def F_batch(self, x, xis):
        return np.array([self.F(x, xi) for xi in xis])

    def h(self, x):
        return self.prox_op.evaluate_h(x)

    def Phi(self, x, xi):
        return self.F(x, xi) + self.h(x)

    def exact_phi(self, x):
        """``phi(x) = f(x) + h(x)`` in closed form, when available."""
        raise NotImplementedError(f"{self.name} has no closed-form objective")

    @property
    def has_exact_phi(self):
        return type(self).exact_phi is not CompositeProblem.exact_phi

    def random_feasible(self, rng, size=None):
        """Random points of ``dom h`` (used by property tests)."""
        raise NotImplementedError
