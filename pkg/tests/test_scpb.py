import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochbundle import (
    InvalidArgumentError,
    OracleError,
    SolverConfig,
    UnboundedCycleError,
    cycle_length_b1,
    cycle_length_b2,
    cycle_size_bound_b1,
    recommended_config,
    run_scpb,
)
from stochbundle.problems import PortfolioProblem, generate_portfolio_instance, make_deterministic_quadratic


def scan_cycle_length(lam, k, tau, C, t=1.0):
    m = 1
    while lam * k * tau**m * t > C:
        m += 1
    return m


@given(
    st.floats(1e-4, 10.0),
    st.integers(1, 5000),
    st.floats(0.05, 0.99),
    st.floats(1e-3, 10.0),
)
@settings(max_examples=300, deadline=None)
def test_b1_matches_linear_scan(lam, k, tau, C):
    assert cycle_length_b1(lam, k, tau, C) == scan_cycle_length(lam, k, tau, C)


@given(st.floats(1e-4, 1.0), st.integers(1, 500), st.floats(0.05, 0.95), st.floats(1e-6, 1e4))
@settings(max_examples=300, deadline=None)
def test_b2_matches_linear_scan(lam, k, tau, t):
    assert cycle_length_b2(lam, k, tau, 2.0, t) == scan_cycle_length(lam, k, tau, 2.0, t)


def test_cycle_rule_examples():
    assert cycle_length_b1(0.001, 10, 0.9, 1.0) == 1
    assert cycle_length_b1(1.0, 2, 0.5, 1.0) == 1
    assert cycle_length_b1(1.0, 3, 0.5, 1.0) == 2
    assert cycle_length_b2(1.0, 50, 0.5, 1.0, 0.0) == 1
    assert cycle_length_b2(1.0, 50, 0.5, 1.0, -3.0) == 1
    with pytest.raises(UnboundedCycleError):
        cycle_length_b2(1.0, 1, 0.5, 1.0, math.inf)
    with pytest.raises(InvalidArgumentError):
        cycle_length_b1(1.0, 1, 1.0, 1.0)


# Reference B1 inner-iteration totals
# (lambda = 0.001, C = 1): B19 at 3000 cycles and B18 at 10 and 800 cycles.
@pytest.mark.parametrize("tau,K,inner", [(0.9, 3000, 17325), (0.8, 10, 20), (0.8, 800, 1600), (0.9, 800, 1600)])
def test_b1_inner_iteration_totals(tau, K, inner):
    total = sum(cycle_length_b1(0.001, k, tau, 1.0) + 1 for k in range(1, K + 1))
    assert total == inner


@given(st.floats(1e-3, 2.0), st.floats(0.1, 0.99), st.floats(0.1, 5.0), st.integers(1, 400))
@settings(max_examples=300, deadline=None)
def test_b1_cycle_size_bound(lam, tau, C, K):
    theta = (tau / (1 - tau)) / K
    for k in (1, K // 2 + 1, K):
        assert cycle_length_b1(lam, k, tau, C) + 1 <= cycle_size_bound_b1(lam, k, C, theta, K)


def test_recommended_config_b1_formula():
    M, Mh, D, lam, eps = 3.0, 0.0, math.sqrt(2), 0.1, 0.01
    cfg = recommended_config(M, Mh, D, lam, eps)
    C = D / (2 * M + Mh)
    theta = lam**2 * M**2 / D**2
    assert cfg.C == pytest.approx(C)
    assert cfg.theta == pytest.approx(theta)
    # 3C(2M)D + D^2 = 3 D^2 + D^2 and 2 lam M^2 / theta = 2 D^2 / lam
    assert cfg.K == math.floor((4 * D**2) / (lam * eps) + 2 * D**2 / (lam * eps)) + 1


@pytest.mark.parametrize("variant", ["B1", "B2"])
def test_recommended_config_scales_inversely_with_eps(variant):
    # K is a floor of terms in 1/eps (and 1/sqrt(eps) for B2) plus one.
    a = recommended_config(2.0, 0.0, 1.0, 0.05, 0.02, variant=variant, sigma=0.5)
    b = recommended_config(2.0, 0.0, 1.0, 0.05, 0.01, variant=variant, sigma=0.5)
    if variant == "B1":
        assert b.K - 1 >= 2 * (a.K - 1) - 1
    else:
        assert b.K > 1.4 * a.K
    with pytest.raises(InvalidArgumentError):
        recommended_config(2.0, 0.0, 1.0, 0.05, 0.0)


def reference_scpb(problem, lam, tau, C, K, variant, gen, x0):
    """Literal transcription of the method with explicit index bookkeeping."""
    xs, xis, ys, us, gammas = [x0], [problem.sample(gen)], [None], [None], [None]

    def ell(j):
        F, s = problem.oracle(xs[j], xis[j])
        return s, F - s @ xs[j]

    def Phi(j):
        return problem.F(xs[j], xis[j]) + problem.h(xs[j])

    j = 0
    out = []
    for k in range(1, K + 1):
        i_k = j + 1
        xc = xs[i_k - 1]
        m = None
        while True:
            j += 1
            if j == i_k:
                g = ell(j - 1)
            else:
                s_new, b_new = ell(j - 1)
                g = ((1 - tau) * s_new + tau * gammas[j - 1][0], (1 - tau) * b_new + tau * gammas[j - 1][1])
            gammas.append(g)
            xs.append(problem.prox_op.prox(xc - lam * g[0], lam))
            xis.append(problem.sample(gen))
            prev_y = xs[j - 1] if j == i_k else ys[j - 1]
            prev_u = Phi(j - 1) if j == i_k else us[j - 1]
            ys.append((1 - tau) * xs[j] + tau * prev_y)
            us.append((1 - tau) * Phi(j) + tau * prev_u)
            if j == i_k:
                if variant == "B1":
                    m = scan_cycle_length(lam, k, tau, C)
                else:
                    d = xs[j] - xc
                    t = us[j] - (g[1] + g[0] @ xs[j] + d @ d / (2 * lam))
                    m = 1 if t <= 0 else scan_cycle_length(lam, k, tau, C, t)
            if j == i_k + m:
                break
        out.append((j, m + 1, ys[j], us[j]))
    return out


@pytest.mark.parametrize("variant,lam,tau,C", [("B1", 0.05, 0.8, 1.0), ("B2", 0.05, 0.9, 2.0), ("B1", 0.3, 0.5, 0.2)])
def test_driver_matches_reference_transcription(variant, lam, tau, C):
    inst = generate_portfolio_instance(8, np.random.default_rng(3))
    P = PortfolioProblem(inst)
    K = 25
    x0 = P.prox_op.project(np.zeros(8))
    ref = reference_scpb(P, lam, tau, C, K, variant, np.random.default_rng(99), x0)
    rec = run_scpb(P, SolverConfig(lam=lam, K=K, C=C, tau=tau, variant=variant), np.random.default_rng(99))
    assert len(rec.cycles) == K
    for cyc, (j_k, size, y, u) in zip(rec.cycles, ref):
        assert cyc.j_k == j_k and cyc.cycle_len == size
        assert np.allclose(cyc.y_hat, y, atol=1e-12)
        assert cyc.u_hat == pytest.approx(u, abs=1e-10)
    assert rec.total_inner_iters == ref[-1][0]


def test_quadratic_converges():
    z = np.zeros(10)
    z[0] = 2.0
    P = make_deterministic_quadratic(10, z)
    rec = run_scpb(P, SolverConfig(lam=1.0, K=200, C=1.0, tau=0.9))
    assert rec.known_gap <= 1e-2
    assert rec.d0 == pytest.approx(np.linalg.norm(np.full(10, 0.1) - np.eye(10)[0]))


def test_deterministic_minorant_and_majorant():
    z = np.array([0.4, 1.5, -0.3, 0.2])
    P = make_deterministic_quadratic(4, z)
    pts = np.random.default_rng(0).dirichlet(np.ones(4), size=50)
    phis = np.array([P.exact_phi(p) for p in pts])
    worst = []

    def check(state):
        vals = state.cut.affine(pts)
        worst.append(max(np.max(vals - phis), P.exact_phi(state.y_cur) - state.u_cur))

    run_scpb(P, SolverConfig(lam=0.5, K=40, C=1.0, tau=0.8), callback=check)
    assert max(worst) <= 1e-9


def test_callback_can_stop_run():
    P = make_deterministic_quadratic(3, np.array([1.0, 0.0, 0.0]))
    rec = run_scpb(P, SolverConfig(lam=1.0, K=50, C=1.0, tau=0.9), callback=lambda s: s.j >= 7)
    assert rec.stopped_early and not rec.aborted


def test_iteration_cap_aborts():
    P = make_deterministic_quadratic(3, np.array([1.0, 0.0, 0.0]))
    rec = run_scpb(P, SolverConfig(lam=10.0, K=50, C=0.1, tau=0.9, max_total_iters=30))
    assert rec.aborted and rec.total_inner_iters == 30
    assert all(c.j_k <= 30 for c in rec.cycles)


def test_nonfinite_oracle_raises():
    class Exploding(type(make_deterministic_quadratic(2, np.zeros(2)))):
        def oracle(self, x, xi):
            return math.inf if x[0] > 0.6 else 0.0, np.array([-1.0, 1.0])

    P = Exploding(np.zeros(2), make_deterministic_quadratic(2, np.zeros(2)).prox_op)
    with pytest.raises(OracleError, match="non-finite"):
        run_scpb(P, SolverConfig(lam=1.0, K=5, C=1.0, tau=0.5, variant="B2"))


def test_same_seed_same_trajectory():
    P = PortfolioProblem(generate_portfolio_instance(5, np.random.default_rng(1)))
    cfg = SolverConfig(lam=0.01, K=30, C=2.0, tau=0.8, variant="B2", seed=4)
    a, b = run_scpb(P, cfg), run_scpb(P, cfg)
    assert np.array_equal(a.y_avg, b.y_avg) and a.u_avg == b.u_avg
    c = run_scpb(P, SolverConfig(lam=0.01, K=30, C=2.0, tau=0.8, variant="B2", seed=5))
    assert not np.array_equal(a.y_avg, c.y_avg)


def test_rejects_infeasible_start():
    P = make_deterministic_quadratic(2, np.zeros(2))
    with pytest.raises(InvalidArgumentError):
        run_scpb(P, SolverConfig(lam=1.0, K=2, C=1.0, tau=0.5, x0=np.array([2.0, 0.0])))
