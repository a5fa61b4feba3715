"""Stochastic composite proximal bundle (SCPB) driver with one aggregated cut.

Each cycle starts with a serious iteration, which moves the prox-center to
the last iterate and resets the model to a fresh linearization, followed by
null iterations that blend new linearizations into the single cut with
weight ``1 - tau``. The cycle length is set at the serious iteration by
rule B1 (``lam k tau^m <= C``) or B2 (``lam k tau^m t <= C`` with ``t`` the
gap between the function estimate and the model value).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    CycleRecord,
    RunRecord,
    RunState,
    SolverConfig,
    blend_cut,
    cut_from_oracle,
    gamma_lambda_value,
    prox_step,
    update_u,
    update_y,
)
from .errors import InvalidArgumentError, OracleError, UnboundedCycleError
from .streams import ALGORITHM, SampleStream, as_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CycleRule:
    variant: str
    C: float

    def __post_init__(self):
        if self.variant not in ("B1", "B2"):
            raise InvalidArgumentError(f"unknown cycle rule {self.variant!r}")
        if not self.C > 0:
            raise InvalidArgumentError("C must be positive")


def _check(lam, k, tau, C):
    if not (lam > 0 and k >= 1 and 0 < tau < 1 and C > 0):
        raise InvalidArgumentError(f"bad cycle-rule inputs lam={lam}, k={k}, tau={tau}, C={C}")


def cycle_length_b1(lam, k, tau, C):
    """Smallest ``m >= 1`` with ``lam * k * tau**m <= C``."""
    _check(lam, k, tau, C)
    ratio = lam * k / C
    if ratio <= 1.0:
        return 1
    m = max(1, math.ceil(math.log(ratio) / math.log(1.0 / tau)))
    # log/ceil can land one off at exact boundaries
    while lam * k * tau**m > C:
        m += 1
    while m > 1 and lam * k * tau ** (m - 1) <= C:
        m -= 1
    return m


def cycle_length_b2(lam, k, tau, C, t_cycle_start):
    """Smallest ``m >= 1`` with ``lam * k * tau**m * t_cycle_start <= C``.

    A non-positive gap satisfies the inequality for every ``m``.
    """
    _check(lam, k, tau, C)
    if math.isnan(t_cycle_start) or t_cycle_start == math.inf:
        raise UnboundedCycleError(f"cycle gap is {t_cycle_start}; cycle length is unbounded")
    if t_cycle_start <= 0:
        return 1
    return cycle_length_b1(lam * t_cycle_start, k, tau, C)


def cycle_size_bound_b1(lam, k, C, theta, K):
    """Upper bound ``ceil((theta K + 1) ln(lam k / C + 1)) + 1`` on ``|C_k|`` under B1."""
    return math.ceil((theta * K + 1.0) * math.log(lam * k / C + 1.0)) + 1


def recommended_config(M, M_h, D, lam, epsilon_bar, variant="B1", sigma=0.0, **overrides):
    """Parameter choice with a guaranteed expected accuracy ``epsilon_bar``.

    B1: ``C = D / (2M + M_h)``, ``theta = lam^2 M^2 / D^2`` and
    ``K = floor((3C(2M+M_h)D + D^2)/(lam eps) + 2 lam M^2/(theta eps)) + 1``.

    B2: ``C = D^2``, ``theta = (lam^2 M^2 + lam sigma) / D^2`` and
    ``K = floor((3C + D^2)/(lam eps) + (2 lam M^2 + 2 sigma)/(theta eps)
    + sqrt(2 lam) M / (theta sqrt(eps))) + 1``.

    The distance ``d0`` of ``x0`` to the solution set is bounded by ``D``.
    ``overrides`` are passed to :class:`SolverConfig` (seed, x0, ...).
    """
    if not epsilon_bar > 0:
        raise InvalidArgumentError("epsilon_bar must be positive")
    if not (M > 0 and M_h >= 0 and D > 0 and lam > 0 and sigma >= 0):
        raise InvalidArgumentError("M, D, lambda must be positive and M_h, sigma nonnegative")
    eps = epsilon_bar
    if variant == "B1":
        C = D / (2 * M + M_h)
        theta = lam**2 * M**2 / D**2
        K = math.floor((3 * C * (2 * M + M_h) * D + D**2) / (lam * eps) + 2 * lam * M**2 / (theta * eps)) + 1
    elif variant == "B2":
        C = D**2
        theta = (lam**2 * M**2 + lam * sigma) / D**2
        K = (
            math.floor(
                (3 * C + D**2) / (lam * eps)
                + (2 * lam * M**2 + 2 * sigma) / (theta * eps)
                + math.sqrt(2 * lam) * M / (theta * math.sqrt(eps))
            )
            + 1
        )
    else:
        raise InvalidArgumentError(f"unknown variant {variant!r}")
    return SolverConfig(lam=lam, K=K, C=C, variant=variant, theta=theta, **overrides)


def run_scpb(problem, config, rng=None, callback=None, name=None):
    """Run SCPB for ``config.K`` cycles.

    Parameters
    ----------
    problem : CompositeProblem
    config : SolverConfig
    rng : SampleStream, numpy Generator or None
        Source of the samples ``xi_0, xi_1, ...``. Defaults to the
        algorithm stream of ``config.seed``.
    callback : callable, optional
        Called as ``callback(state)`` with the :class:`RunState` after every
        iteration; returning ``True`` stops the run (``stopped_early``).
    name : str, optional
        Method label stored in the record.

    Returns
    -------
    RunRecord
        With ``aborted`` set when the iteration cap cut a cycle short.
    """
    if rng is None:
        rng = SampleStream.derive(config.seed, ALGORITHM)
    gen = as_generator(rng)
    lam, tau, K = config.lam, config.tau, config.K
    rule = CycleRule(config.variant, config.C)
    x0 = problem.prox_op.project(np.zeros(problem.dim)) if config.x0 is None else np.asarray(config.x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise InvalidArgumentError(f"x0 has shape {x0.shape}, expected ({problem.dim},)")
    if not math.isfinite(problem.h(x0)):
        raise InvalidArgumentError("x0 must lie in dom h")

    record = RunRecord(method=name or f"SCPB-{config.variant}", y_avg=x0.copy(), u_avg=math.nan, total_inner_iters=0)
    start = time.perf_counter()

    def evaluate(x, j):
        xi = problem.sample(gen)
        try:
            F_value, s = problem.oracle(x, xi)
        except OracleError as exc:
            raise OracleError(f"oracle failed at iteration {j}: {exc}") from exc
        if not (math.isfinite(F_value) and np.all(np.isfinite(s))):
            raise OracleError(f"oracle returned a non-finite value at iteration {j}")
        return F_value + problem.h(x), cut_from_oracle(x, F_value, s)

    # step 0: xi_0 pairs with x_0
    phi_last, cut_last = evaluate(x0, 0)
    x_last = x0
    j = 0
    state = None
    for k in range(1, K + 1):
        i_k = j + 1
        x_center = x_last
        # serious iteration
        j = i_k
        cut = cut_last
        x = prox_step(cut, x_center, lam, problem)
        y = update_y(x, x_last, tau)
        phi_x, cut_x = evaluate(x, j)
        u = update_u(phi_x, phi_last, tau)
        t_start = None
        if rule.variant == "B1":
            m = cycle_length_b1(lam, k, tau, rule.C)
        else:
            t_start = u - gamma_lambda_value(cut, x, x_center, lam, problem)
            try:
                m = cycle_length_b2(lam, k, tau, rule.C, t_start)
            except UnboundedCycleError as exc:
                record.aborted, record.abort_reason = True, f"cycle {k}: {exc}"
                logger.warning(record.abort_reason)
                break
        j_k = i_k + m
        state = RunState(
            j=j, k=k, i_k=i_k, x_center=x_center, x_cur=x, y_cur=y, u_cur=u,
            x_prev_serious=x_center, phi_prev_sample=phi_x, cut=cut, j_k_target=j_k,
            t_cycle_start=t_start,
        )
        if callback is not None and callback(state):
            record.stopped_early = True
            break
        truncated = j_k > config.max_total_iters
        if truncated:
            record.aborted = True
            record.abort_reason = (
                f"cycle {k} needs {m + 1} iterations (j_k={j_k}) beyond max_total_iters={config.max_total_iters}"
            )
            logger.warning(record.abort_reason)
        last = min(j_k, config.max_total_iters)
        # null iterations
        stop = False
        while j < last:
            j += 1
            cut = blend_cut(cut, cut_x, tau)
            x = prox_step(cut, x_center, lam, problem)
            y = update_y(x, y, tau)
            phi_x, cut_x = evaluate(x, j)
            u = update_u(phi_x, u, tau)
            state.j, state.x_cur, state.y_cur, state.u_cur = j, x, y, u
            state.phi_prev_sample, state.cut = phi_x, cut
            if callback is not None and callback(state):
                stop = record.stopped_early = True
                break
        if truncated or stop:
            break
        x_last, phi_last, cut_last = x, phi_x, cut_x
        record.cycles.append(
            CycleRecord(
                k=k, j_k=j_k, cycle_len=m + 1, y_hat=y, u_hat=float(u),
                wall_ms=1000.0 * (time.perf_counter() - start), t_start=t_start,
            )
        )

    record.total_inner_iters = j
    record.wall_ms = 1000.0 * (time.perf_counter() - start)
    if record.cycles:
        record.y_avg, record.u_avg = record.averaged_output(len(record.cycles))
    if problem.reference_opt is not None and problem.has_exact_phi:
        x_star, phi_star = problem.reference_opt
        record.known_gap = problem.exact_phi(record.y_avg) - phi_star
        record.d0 = float(np.linalg.norm(x0 - x_star))
    return record
