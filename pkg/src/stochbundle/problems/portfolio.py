"""Piecewise-max portfolio problem over the simplex.

    min_{x in simplex} E[ g( sum_i (i/n + xi_i) x_i ) ],  xi_i ~ N(0, 1) iid,

with ``g(t) = max_r (v_r + s_r t)`` convex piecewise affine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ..prox import simplex_indicator
from .base import CompositeProblem

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PortfolioInstance:
    """Dimension and the affine pieces ``(v_r, s_r)`` of ``g``.

    ``knots`` are the breakpoints used to generate the pieces (empty when
    the pieces were given directly).
    """

    n: int
    v: tuple
    s: tuple
    knots: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        if len(self.v) != len(self.s) or len(self.v) < 1:
            raise ValueError("need at least one affine piece, with matching v and s")
        object.__setattr__(self, "v", tuple(float(a) for a in self.v))
        object.__setattr__(self, "s", tuple(float(a) for a in self.s))
        object.__setattr__(self, "knots", tuple(float(a) for a in self.knots))

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return np.max(np.asarray(self.v) + np.asarray(self.s) * t[..., None], axis=-1)

    def to_dict(self):
        return {
            "family": "portfolio",
            "n": self.n,
            "v": list(self.v),
            "s": list(self.s),
            "knots": list(self.knots),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(n=int(d["n"]), v=d["v"], s=d["s"], knots=d.get("knots", ()), seed=d.get("seed"))


def generate_portfolio_instance(n, rng, n_breakpoints=10, offset=10.0, slope_range=(0.0, 5.0), seed=None):
    """Random convex ``g`` with ``n_breakpoints`` kinks drawn uniformly on [0, 1].

    Slopes are sorted uniform draws on ``slope_range`` (one more slope than
    kinks) and the intercepts make ``g`` continuous with ``g(0) = offset``
    on the first piece.
    """
    knots = np.sort(rng.uniform(0.0, 1.0, size=n_breakpoints))
    slopes = np.sort(rng.uniform(*slope_range, size=n_breakpoints + 1))
    v = np.empty(n_breakpoints + 1)
    v[0] = offset
    for r in range(1, n_breakpoints + 1):
        v[r] = v[r - 1] - (slopes[r] - slopes[r - 1]) * knots[r - 1]
    return PortfolioInstance(n=n, v=tuple(v), s=tuple(slopes), knots=tuple(knots), seed=seed)


def upper_envelope(v, s):
    """Active pieces of ``max_r (v_r + s_r t)`` in increasing-slope order.

    Returns ``(v_act, s_act, kinks)`` where piece ``r`` is the max on
    ``[kinks[r-1], kinks[r]]`` (with ``kinks[-1] = -inf``,
    ``kinks[len] = +inf``).
    """
    order = np.lexsort((np.asarray(v), np.asarray(s)))
    lines = []
    for idx in order:
        a, b = float(v[idx]), float(s[idx])
        # equal slopes: the later one in lexsort order has the larger intercept
        if lines and lines[-1][1] == b:
            lines.pop()
        while len(lines) >= 2:
            (a1, b1), (a2, b2) = lines[-2], lines[-1]
            # line 2 is dominated if line 3 overtakes line 1 no later than line 2 does
            if (a - a1) * (b2 - b1) >= (a2 - a1) * (b - b1):
                lines.pop()
            else:
                break
        lines.append((a, b))
    va = np.array([ln[0] for ln in lines])
    sa = np.array([ln[1] for ln in lines])
    kinks = (va[:-1] - va[1:]) / (sa[1:] - sa[:-1])
    return va, sa, kinks


def expected_max_affine_normal(v, s, mu, sigma):
    """``E[max_r (v_r + s_r T)]`` for ``T ~ N(mu, sigma^2)``, in closed form."""
    va, sa, kinks = upper_envelope(v, s)
    if sigma == 0:
        return float(np.max(va + sa * mu))
    z = np.concatenate(([-np.inf], (kinks - mu) / sigma, [np.inf]))
    cdf = ndtr(z)
    pdf = np.where(np.isfinite(z), _INV_SQRT_2PI * np.exp(-0.5 * np.where(np.isfinite(z), z, 0.0) ** 2), 0.0)
    mass = cdf[1:] - cdf[:-1]
    # int_a^b (A + B sigma z) dN(z) = A (Phi(b) - Phi(a)) + B sigma (pdf(a) - pdf(b))
    return float(np.sum((va + sa * mu) * mass + sa * sigma * (pdf[:-1] - pdf[1:])))


class PortfolioProblem(CompositeProblem):
    def __init__(self, instance):
        self.instance = instance
        self.dim = n = instance.n
        self.prox_op = simplex_indicator(n)
        self.base = np.arange(1, n + 1) / n
        self._v = np.asarray(instance.v)
        self._s = np.asarray(instance.s)
        # E||s||^2 <= max_r s_r^2 * E||w||^2 with E||w||^2 = sum (i/n)^2 + n
        self.M = float(np.max(np.abs(self._s)) * np.sqrt(self.base @ self.base + n))
        self.name = f"portfolio(n={n})"

    def sample(self, rng):
        return rng.standard_normal(self.dim)

    def sample_batch(self, rng, size):
        return rng.standard_normal((size, self.dim))

    def oracle(self, x, xi):
        w = self.base + xi
        t = float(w @ x)
        vals = self._v + self._s * t
        r = int(np.argmax(vals))
        return float(vals[r]), self._s[r] * w

    def F_batch(self, x, xis):
        t = (self.base + xis) @ np.asarray(x, dtype=float)
        return np.max(self._v + self._s * t[:, None], axis=1)

    def exact_phi(self, x):
        x = np.asarray(x, dtype=float)
        mu = float(self.base @ x)
        sigma = float(np.linalg.norm(x))
        return expected_max_affine_normal(self._v, self._s, mu, sigma) + self.h(x)

    def random_feasible(self, rng, size=None):
        return rng.dirichlet(np.ones(self.dim), size=size)


def portfolio_oracle(x, xi, instance):
    """``(F(x, xi), s(x, xi))`` for a :class:`PortfolioInstance`."""
    return PortfolioProblem(instance).oracle(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))


def portfolio_exact_phi(x, instance):
    return PortfolioProblem(instance).exact_phi(x)
