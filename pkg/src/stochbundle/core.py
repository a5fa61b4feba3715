"""Domain types and the elementary SCPB update formulas.

The bundle model kept by the method is a single composite affine function

    Gamma_j(u) = intercept + <slope, u> + h(u),

so an :class:`AggregateCut` stores only ``(slope, intercept)``; ``h`` is
shared by every linearization and is added back on evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, OracleError

VARIANTS = ("B1", "B2")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AggregateCut:
    """Affine part of the aggregated model ``Gamma_j``."""

    slope: np.ndarray
    intercept: float

    def __post_init__(self):
        slope = _frozen(self.slope)
        if slope.ndim != 1:
            raise InvalidArgumentError("cut slope must be a vector")
        if not (np.all(np.isfinite(slope)) and math.isfinite(self.intercept)):
            raise InvalidArgumentError("cut has non-finite entries")
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def dim(self):
        return self.slope.shape[0]

    def affine(self, u):
        """``intercept + <slope, u>`` (``u`` may be a stack of points)."""
        return self.intercept + np.asarray(u) @ self.slope

    def model_value(self, u, problem):
        """``Gamma(u)``: affine part plus ``h(u)`` (row-wise for a stack of points)."""
        u = np.asarray(u)
        if u.ndim == 2:
            return self.affine(u) + np.array([problem.h(r) for r in u])
        return self.affine(u) + problem.h(u)


@dataclass(frozen=True)
class SolverConfig:
    """Inputs of SCPB.

    Exactly one of ``theta`` / ``tau`` must be given; the other is derived
    from ``tau = theta K / (theta K + 1)``.
    """

    lam: float
    K: int
    C: float
    variant: str = "B1"
    theta: Optional[float] = None
    tau: Optional[float] = None
    seed: int = 0
    x0: Optional[np.ndarray] = None
    max_total_iters: int = 10_000_000

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")
        if int(self.K) != self.K or self.K < 1:
            raise InvalidArgumentError(f"K must be a positive integer, got {self.K}")
        if not self.C > 0:
            raise InvalidArgumentError(f"C must be positive, got {self.C}")
        if self.variant not in VARIANTS:
            raise InvalidArgumentError(f"variant must be one of {VARIANTS}")
        if self.max_total_iters < 1:
            raise InvalidArgumentError("max_total_iters must be >= 1")
        if (self.theta is None) == (self.tau is None):
            raise InvalidArgumentError("give exactly one of theta or tau")
        if self.tau is not None:
            theta = theta_from_tau(self.tau, self.K)
            object.__setattr__(self, "theta", theta)
        else:
            object.__setattr__(self, "tau", tau_from_theta(self.theta, self.K))
        if self.x0 is not None:
            object.__setattr__(self, "x0", _frozen(self.x0))


@dataclass
class RunState:
    """Mutable state of one SCPB run, owned by the driver.

    ``t_cycle_start`` is only populated under variant B2.
    """

    j: int
    k: int
    i_k: int
    x_center: np.ndarray
    x_cur: np.ndarray
    y_cur: np.ndarray
    u_cur: float
    x_prev_serious: np.ndarray
    phi_prev_sample: float
    cut: AggregateCut
    j_k_target: int
    t_cycle_start: Optional[float] = None

    @property
    def serious(self):
        """True at the first iteration of a cycle."""
        return self.j == self.i_k


@dataclass
class CycleRecord:
    k: int
    j_k: int
    cycle_len: int
    y_hat: np.ndarray
    u_hat: float
    wall_ms: float
    t_start: Optional[float] = None


@dataclass
class IterateRecord:
    """Checkpoint of an iterate-averaging method (SMD)."""

    t: int
    x_avg: np.ndarray
    x_last: np.ndarray
    wall_ms: float


@dataclass
class RunRecord:
    """Trace and output of a solver run.

    For SCPB, ``cycles`` holds ``(y_hat_k, u_hat_k)`` per cycle and
    ``y_avg``/``u_avg`` the averages over cycles ``floor(K/2)+1 .. K``.
    For SMD, ``iterates`` holds the requested checkpoints and ``u_avg`` is
    NaN.
    """

    method: str
    y_avg: np.ndarray
    u_avg: float
    total_inner_iters: int
    cycles: list = field(default_factory=list)
    iterates: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""
    stopped_early: bool = False
    wall_ms: float = 0.0
    known_gap: Optional[float] = None
    d0: Optional[float] = None

    def averaged_output(self, k):
        """``(y^a_k, u^a_k)``: mean of ``y_hat``/``u_hat`` over cycles ``floor(k/2)+1..k``."""
        if not 1 <= k <= len(self.cycles):
            raise InvalidArgumentError(f"cycle {k} not recorded")
        sel = self.cycles[k // 2 : k]
        y = np.mean([c.y_hat for c in sel], axis=0)
        u = float(np.mean([c.u_hat for c in sel]))
        return y, u


def tau_from_theta(theta, K):
    """``tau = theta K / (theta K + 1)``."""
    if not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")
    tk = theta * K
    return tk / (tk + 1.0)


def theta_from_tau(tau, K):
    """Inverse of :func:`tau_from_theta`: ``theta = tau / ((1 - tau) K)``."""
    if not 0 < tau < 1:
        raise InvalidArgumentError(f"tau must lie in (0, 1), got {tau}")
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")
    return tau / ((1.0 - tau) * K)


def cut_from_oracle(x, F_value, subgrad):
    """Cut of ``F(x, xi) + <s(x, xi), . - x>`` from an already evaluated oracle."""
    s = np.asarray(subgrad, dtype=float)
    return AggregateCut(s, F_value - float(s @ np.asarray(x, dtype=float)))


def serious_cut(x, xi, problem):
    """Fresh linearization ``l_Phi(. ; x, xi)`` minus ``h``."""
    F_value, s = problem.oracle(x, xi)
    return cut_from_oracle(x, F_value, s)


def blend_cut(prev, fresh, tau):
    """``(1 - tau) * fresh + tau * prev``."""
    if prev.dim != fresh.dim:
        raise InvalidArgumentError(f"cut dimensions differ: {prev.dim} vs {fresh.dim}")
    return AggregateCut(
        (1.0 - tau) * fresh.slope + tau * prev.slope,
        (1.0 - tau) * fresh.intercept + tau * prev.intercept,
    )


def prox_step(cut, x_center, lam, problem):
    """Minimizer of ``Gamma(u) + ||u - x_center||^2 / (2 lam)``.

    The intercept does not move the argmin, so this is
    ``prox_{lam h}(x_center - lam * slope)``.
    """
    if not lam > 0:
        raise InvalidArgumentError("lambda must be positive")
    v = np.asarray(x_center, dtype=float) - lam * cut.slope
    try:
        x = problem.prox_op.prox(v, lam)
    except Exception as exc:  # pragma: no cover - defensive
        raise OracleError(f"prox oracle failed: {exc}") from exc
    return np.asarray(x, dtype=float)


def gamma_lambda_value(cut, x, x_center, lam, problem):
    """``Gamma(x) + ||x - x_center||^2 / (2 lam)``; ``+inf`` outside ``dom h``."""
    hx = problem.h(x)
    if not math.isfinite(hx):
        return math.inf
    d = np.asarray(x) - np.asarray(x_center)
    return float(cut.affine(x) + hx + (d @ d) / (2.0 * lam))


def update_y(x_new, prev, tau):
    x_new = np.asarray(x_new, dtype=float)
    prev = np.asarray(prev, dtype=float)
    if x_new.shape != prev.shape:
        raise InvalidArgumentError("dimension mismatch in update_y")
    return (1.0 - tau) * x_new + tau * prev


def update_u(phi_new_sample, prev_u, tau):
    return (1.0 - tau) * phi_new_sample + tau * prev_u
