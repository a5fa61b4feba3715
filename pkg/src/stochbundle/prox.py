"""Projections and prox operators of the simple convex terms ``h``.

Every operator here is the prox of an indicator function (or of ``h = 0``),
so ``prox(v, alpha)`` does not depend on ``alpha`` and is a Euclidean
projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Membership slack used when evaluating indicator functions.
FEASIBILITY_TOL = 1e-9


def project_simplex(v):
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold method: with ``u`` sorted in decreasing order, the
    support size is the largest ``rho`` such that
    ``u_rho + (1 - sum_{i<=rho} u_i) / rho > 0``.

    Parameters
    ----------
    v : array_like, shape (n,) or (m, n)
        Point(s) to project. A 2-D input is projected row by row.

    Returns
    -------
    numpy.ndarray
        Projection(s), same shape as ``v``.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return project_simplex(v[None, :])[0]
    n = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    # cond is true on a prefix, so rho = number of true entries
    rho = np.count_nonzero(cond, axis=-1)
    theta = css[np.arange(v.shape[0]), rho - 1] / rho
    return np.maximum(v - theta[:, None], 0.0)


def project_ball(v, center, radius):
    """Euclidean projection onto ``{x : ||x - center|| <= radius}``."""
    v = np.asarray(v, dtype=float)
    center = np.asarray(center, dtype=float)
    d = v - center
    nrm = np.linalg.norm(d)
    if nrm <= radius:
        return v.copy()
    return center + (radius / nrm) * d


@dataclass(frozen=True)
class ProxOperator:
    """The simple term ``h`` together with its prox and domain constants.

    Attributes
    ----------
    evaluate_h : callable
        ``x -> h(x)``; ``+inf`` outside ``dom h``.
    prox : callable
        ``(v, alpha) -> argmin_u h(u) + ||u - v||^2 / (2 alpha)``.
    diameter : float
        Diameter ``D`` of ``dom h`` (``inf`` when unbounded).
    lipschitz : float
        Lipschitz constant ``M_h`` of ``h`` on its domain.
    is_indicator : bool
        True when ``h`` is the indicator of a closed convex set; then
        ``prox`` is the projection onto that set.
    name : str
    """

    evaluate_h: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    diameter: float
    lipschitz: float = 0.0
    is_indicator: bool = True
    name: str = "h"

    def project(self, v):
        return self.prox(v, 1.0)


def simplex_indicator(n):
    """Indicator of the probability simplex in ``R^n`` (``D = sqrt(2)``)."""

    def h(x):
        x = np.asarray(x)
        if x.min() >= -FEASIBILITY_TOL and abs(x.sum() - 1.0) <= FEASIBILITY_TOL:
            return 0.0
        return np.inf

    return ProxOperator(
        evaluate_h=h,
        prox=lambda v, alpha: project_simplex(v),
        diameter=np.sqrt(2.0) if n > 1 else 0.0,
        name=f"simplex({n})",
    )


def ball_indicator(center, radius):
    """Indicator of a Euclidean ball (``D = 2 * radius``)."""
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")

    def h(x):
        if np.linalg.norm(np.asarray(x) - center) <= radius * (1 + FEASIBILITY_TOL):
            return 0.0
        return np.inf

    return ProxOperator(
        evaluate_h=h,
        prox=lambda v, alpha: project_ball(v, center, radius),
        diameter=2.0 * radius,
        name=f"ball(r={radius})",
    )


def no_constraint():
    """``h = 0`` on all of ``R^n``; prox is the identity."""
    return ProxOperator(
        evaluate_h=lambda x: 0.0,
        prox=lambda v, alpha: np.array(v, dtype=float),
        diameter=np.inf,
        name="zero",
    )
