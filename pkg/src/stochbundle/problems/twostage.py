"""Two-stage stochastic QP with simplex first and second stages.

    min_{x1 in simplex} c^T x1 + E[Q(x1, xi)],
    Q(x1, xi) = min_{x2 in simplex} 1/2 z^T (xi xi^T + lam0 I) z + xi^T z,  z = (x1; x2).

With ``s = xi^T z`` the recourse objective is
``s^2 / 2 + s + lam0 ||z||^2 / 2``, so the Hessian-vector product is
``xi (xi^T v) + lam0 v`` and every solver iteration costs O(n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import OracleError
from ..prox import project_simplex, simplex_indicator
from .base import CompositeProblem

MAX_RECOURSE_ITERS = 100_000


@dataclass(frozen=True)
class TwoStageQuadInstance:
    n: int
    c: tuple
    means: tuple
    stds: tuple
    lambda0: float = 2.0
    seed: int | None = None

    def __post_init__(self):
        for name, size in (("c", self.n), ("means", 2 * self.n), ("stds", 2 * self.n)):
            vals = tuple(float(a) for a in getattr(self, name))
            if len(vals) != size:
                raise ValueError(f"{name} must have length {size}")
            object.__setattr__(self, name, vals)
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")

    def to_dict(self):
        return {
            "family": "twostage",
            "n": self.n,
            "c": list(self.c),
            "means": list(self.means),
            "stds": list(self.stds),
            "lambda0": self.lambda0,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n=int(d["n"]),
            c=d["c"],
            means=d["means"],
            stds=d["stds"],
            lambda0=float(d.get("lambda0", 2.0)),
            seed=d.get("seed"),
        )


def generate_twostage_instance(n, rng, lambda0=2.0, seed=None):
    """Costs in [1, 3], scenario means in [5, 25] and std devs in [5, 15]."""
    c = rng.uniform(1.0, 3.0, size=n)
    means = rng.uniform(5.0, 25.0, size=2 * n)
    stds = rng.uniform(5.0, 15.0, size=2 * n)
    return TwoStageQuadInstance(n, tuple(c), tuple(means), tuple(stds), lambda0, seed)


def default_recourse_tol(xi):
    # The residual is a step of length 1/L in x-space, so the gradient-mapping
    # error is L * tol; scaling with 1/L keeps Q accurate to ~1e-12.
    return 1e-6 / (1.0 + float(np.dot(xi, xi)))


class RecourseResult(NamedTuple):
    value: float
    x2: np.ndarray
    residual: float
    iterations: int


def _recourse_value(a, c, x1sq, x2, lam0):
    s = a + x2 @ c
    return 0.5 * s * s + s + 0.5 * lam0 * (x1sq + x2 @ x2)


def recourse_residual(x1, xi, x2, instance):
    """Projected-gradient fixed-point residual ``||x2 - P(x2 - grad / L)||``, ``L = ||xi||^2 + lam0``."""
    n = instance.n
    xi = np.asarray(xi, dtype=float)
    a = float(xi[:n] @ x1)
    c = xi[n:]
    L = float(xi @ xi) + instance.lambda0
    g = (a + c @ x2 + 1.0) * c + instance.lambda0 * x2
    return float(np.linalg.norm(x2 - project_simplex(x2 - g / L)))


def solve_recourse(x1, xi, instance, tol=None, x2_init=None):
    """Accelerated projected gradient on the second-stage block.

    Strongly convex momentum ``(1 - q)/(1 + q)``, ``q = sqrt(lam0 / L)``,
    with a gradient-based restart. Stops once the fixed-point residual is
    at most ``tol`` (default ``1e-6 / (1 + ||xi||^2)``).

    Returns
    -------
    RecourseResult
        ``(value, x2, residual, iterations)``; the first two entries are
        ``Q(x1, xi)`` and the second-stage solution.

    Raises
    ------
    OracleError
        If the residual is not reached in ``MAX_RECOURSE_ITERS`` iterations.
    """
    n = instance.n
    x1 = np.asarray(x1, dtype=float)
    xi = np.asarray(xi, dtype=float)
    lam0 = instance.lambda0
    tol = default_recourse_tol(xi) if tol is None else tol
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = float(xi[:n] @ x1)
    c = xi[n:]
    L = float(xi @ xi) + lam0
    q = np.sqrt(lam0 / L)
    beta = (1.0 - q) / (1.0 + q)

    def grad(v):
        return (a + c @ v + 1.0) * c + lam0 * v

    x = np.full(n, 1.0 / n) if x2_init is None else project_simplex(x2_init)
    y = x
    for it in range(1, MAX_RECOURSE_ITERS + 1):
        gy = grad(y)
        x_new = project_simplex(y - gy / L)
        g_new = grad(x_new)
        res = float(np.linalg.norm(x_new - project_simplex(x_new - g_new / L)))
        if res <= tol:
            return RecourseResult(_recourse_value(a, c, x1 @ x1, x_new, lam0), x_new, res, it)
        if (y - x_new) @ (x_new - x) > 0:
            y = x_new  # restart momentum
        else:
            y = x_new + beta * (x_new - x)
        x = x_new
    raise OracleError(f"recourse solver did not reach residual {tol:g} in {MAX_RECOURSE_ITERS} iterations (last {res:g})")


def solve_recourse_batch(x1, xis, instance, tol=None):
    """Row-wise :func:`solve_recourse` for a stack of scenarios.

    Each row runs the same iteration and is frozen once its residual
    reaches its tolerance. Returns ``(values, x2s)``.
    """
    n = instance.n
    x1 = np.asarray(x1, dtype=float)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    B = xis.shape[0]
    lam0 = instance.lambda0
    sq = np.einsum("ij,ij->i", xis, xis)
    tol = 1e-6 / (1.0 + sq) if tol is None else np.broadcast_to(tol, (B,)).astype(float)
    a = xis[:, :n] @ x1
    c = xis[:, n:]
    L = sq + lam0
    q = np.sqrt(lam0 / L)
    beta = ((1.0 - q) / (1.0 + q))[:, None]

    def grad(v, rows):
        return (a[rows] + np.einsum("ij,ij->i", c[rows], v) + 1.0)[:, None] * c[rows] + lam0 * v

    x = np.full((B, n), 1.0 / n)
    y = x.copy()
    out = np.empty((B, n))
    active = np.arange(B)
    for _ in range(MAX_RECOURSE_ITERS):
        La = L[active][:, None]
        x_new = project_simplex(y - grad(y, active) / La)
        res = np.linalg.norm(x_new - project_simplex(x_new - grad(x_new, active) / La), axis=1)
        done = res <= tol[active]
        out[active[done]] = x_new[done]
        keep = ~done
        if not keep.any():
            break
        restart = np.einsum("ij,ij->i", y - x_new, x_new - x) > 0
        y = np.where(restart[:, None], x_new, x_new + beta[active] * (x_new - x))
        active, x, y = active[keep], x_new[keep], y[keep]
    else:
        raise OracleError(f"batched recourse solver did not converge for {active.size} scenarios")
    s = a + np.einsum("ij,ij->i", c, out)
    values = 0.5 * s * s + s + 0.5 * lam0 * (x1 @ x1 + np.einsum("ij,ij->i", out, out))
    return values, out


def solve_recourse_exact_batch(x1, xis, instance, n_bisect=100):
    """Second-stage solutions via a scalar root (independent of the APG path).

    Optimality gives ``x2 = P(-w c / lam0)`` with ``w = s + 1`` and
    ``c = xi_2``; ``w`` is the unique root of the strictly decreasing
    ``g(w) = a + 1 + c^T P(-w c / lam0) - w`` on
    ``[a + 1 + min c, a + 1 + max c]``. Bisection locates the active set,
    then ``w`` is solved in closed form on it::

        w = (a + 1 + C_S / |S|) / (1 + (Q_S - C_S^2 / |S|) / lam0)

    with ``C_S``, ``Q_S`` the sum and sum of squares of ``c`` on the support.

    Returns ``(values, x2s)``.
    """
    n = instance.n
    lam0 = instance.lambda0
    x1 = np.asarray(x1, dtype=float)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    a = xis[:, :n] @ x1
    c = xis[:, n:]
    lo = a + 1.0 + c.min(axis=1)
    hi = a + 1.0 + c.max(axis=1)

    def g(w):
        x2 = project_simplex(-w[:, None] * c / lam0)
        return a + 1.0 + np.einsum("ij,ij->i", c, x2) - w, x2

    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        gm, _ = g(mid)
        pos = gm > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            break
    w = 0.5 * (lo + hi)
    _, x2 = g(w)
    # closed-form root on the identified support
    S = x2 > 0
    m = S.sum(axis=1)
    CS = np.where(S, c, 0.0).sum(axis=1)
    QS = np.where(S, c * c, 0.0).sum(axis=1)
    w_on = (a + 1.0 + CS / m) / (1.0 + (QS - CS * CS / m) / lam0)
    g_on, x2_on = g(w_on)
    g_w, _ = g(w)
    better = np.abs(g_on) < np.abs(g_w)
    w = np.where(better, w_on, w)
    x2 = np.where(better[:, None], x2_on, x2)
    s = w - 1.0
    values = 0.5 * s * s + s + 0.5 * lam0 * (x1 @ x1 + np.einsum("ij,ij->i", x2, x2))
    return values, x2


def solve_recourse_exact(x1, xi, instance):
    values, x2s = solve_recourse_exact_batch(x1, np.asarray(xi, dtype=float)[None, :], instance)
    return float(values[0]), x2s[0]


class TwoStageProblem(CompositeProblem):
    """Simplex-constrained first stage with recourse ``Q``; ``F = c^T x1 + Q``.

    ``recourse`` selects the second-stage solver: ``"exact"`` (scalar root,
    polished by APG if its residual exceeds ``tol``) or ``"apg"``.
    """

    def __init__(self, instance, tol=None, recourse="exact", M=None, m_samples=10_000):
        if recourse not in ("exact", "apg"):
            raise ValueError(f"unknown recourse solver {recourse!r}")
        self.instance = instance
        self.dim = n = instance.n
        self.prox_op = simplex_indicator(n)
        self.c = np.asarray(instance.c)
        self.means = np.asarray(instance.means)
        self.stds = np.asarray(instance.stds)
        self.tol = tol
        self.recourse = recourse
        self._M = M
        self._m_samples = m_samples
        self.name = f"twostage(n={n})"

    def sample(self, rng):
        return self.means + self.stds * rng.standard_normal(2 * self.dim)

    def sample_batch(self, rng, size):
        return self.means + self.stds * rng.standard_normal((size, 2 * self.dim))

    def _subgrad(self, x1, xi, x2):
        # Danskin: x1-block of (xi xi^T + lam0 I) z + xi at z = (x1; x2*), plus c
        n = self.dim
        s = xi[:n] @ x1 + xi[n:] @ x2
        return self.c + (s + 1.0) * xi[:n] + self.instance.lambda0 * x1

    def second_stage(self, x, xi):
        """``(Q(x, xi), x2*)`` with the configured solver."""
        if self.recourse == "apg":
            res = solve_recourse(x, xi, self.instance, self.tol)
            return res.value, res.x2
        q, x2 = solve_recourse_exact(x, xi, self.instance)
        tol = default_recourse_tol(xi) if self.tol is None else self.tol
        if recourse_residual(x, xi, x2, self.instance) > tol:
            res = solve_recourse(x, xi, self.instance, tol, x2_init=x2)
            return res.value, res.x2
        return q, x2

    def oracle(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        q, x2 = self.second_stage(x, xi)
        return float(self.c @ x + q), self._subgrad(x, xi, x2)

    def oracle_batch(self, x, xis):
        x = np.asarray(x, dtype=float)
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        if self.recourse == "apg":
            values, x2s = solve_recourse_batch(x, xis, self.instance, self.tol)
        else:
            values, x2s = solve_recourse_exact_batch(x, xis, self.instance)
        n = self.dim
        s = xis[:, :n] @ x + np.einsum("ij,ij->i", xis[:, n:], x2s)
        grads = self.c + (s + 1.0)[:, None] * xis[:, :n] + self.instance.lambda0 * x
        return self.c @ x + values, grads

    def F_batch(self, x, xis):
        return self.oracle_batch(x, np.atleast_2d(xis))[0]

    def random_feasible(self, rng, size=None):
        return rng.dirichlet(np.ones(self.dim), size=size)

    @property
    def M(self):
        """Monte-Carlo second-moment bound, estimated once on first use."""
        if self._M is None:
            self._M = estimate_second_moment(self, np.random.default_rng(self.instance.seed or 0), self._m_samples)
        return self._M


def estimate_second_moment(problem, rng, n_samples=10_000, n_random=4):
    """``sqrt(max_x mean ||s(x, xi)||^2)`` over a few probe points.

    Probes the vertex with the largest ``E[xi_i^2]`` in the first-stage
    block (where ``||s||`` is largest), the centroid and ``n_random``
    random points of the simplex.
    """
    n = problem.dim
    second = problem.means[:n] ** 2 + problem.stds[:n] ** 2
    probes = [np.eye(n)[int(np.argmax(second))], np.full(n, 1.0 / n)]
    probes += list(rng.dirichlet(np.ones(n), size=n_random))
    best = 0.0
    for x in probes:
        xis = problem.sample_batch(rng, n_samples)
        _, grads = problem.oracle_batch(x, xis)
        best = max(best, float(np.mean(np.einsum("ij,ij->i", grads, grads))))
    return float(np.sqrt(best))


def twostage_oracle(x1, xi, instance, tol=None):
    """``(c^T x1 + Q(x1, xi), subgradient)`` using the APG recourse solver at ``tol``."""
    return TwoStageProblem(instance, tol=tol, recourse="apg", M=np.nan).oracle(x1, xi)
