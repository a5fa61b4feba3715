import numpy as np
import pytest

from stochbundle import InvalidArgumentError, SmdConfig, UnsupportedProblemError, run_smd
from stochbundle.prox import ProxOperator, project_simplex
from stochbundle.problems import PortfolioProblem, generate_portfolio_instance, make_deterministic_quadratic


def test_smd_matches_hand_loop():
    P = PortfolioProblem(generate_portfolio_instance(5, np.random.default_rng(0)))
    cfg = SmdConfig(N=200, theta_smd=0.5)
    rec = run_smd(P, cfg, np.random.default_rng(3), checkpoints=(10, 50))
    gen = np.random.default_rng(3)
    x = np.full(5, 0.2)
    xs = []
    for _ in range(200):
        _, s = P.oracle(x, P.sample(gen))
        x = project_simplex(x - 0.5 / np.sqrt(200) * s)
        xs.append(x)
    assert np.allclose(rec.y_avg, np.mean(xs, axis=0), atol=1e-13)
    assert [it.t for it in rec.iterates] == [10, 50, 200]
    assert np.allclose(rec.iterates[0].x_avg, np.mean(xs[:10], axis=0), atol=1e-13)
    assert np.allclose(rec.iterates[1].x_last, xs[49])
    assert rec.total_inner_iters == 200 and np.isnan(rec.u_avg)


def test_smd_step():
    assert SmdConfig(N=100).step == pytest.approx(0.1)
    with pytest.raises(InvalidArgumentError):
        SmdConfig(N=0)


def test_smd_converges_on_quadratic():
    P = make_deterministic_quadratic(4, np.array([1.5, 0.2, 0.0, -1.0]))
    rec = run_smd(P, SmdConfig(N=5000))
    assert rec.known_gap <= 1e-2


def test_smd_rejects_non_indicator():
    P = make_deterministic_quadratic(2, np.zeros(2))
    P.prox_op = ProxOperator(lambda x: abs(x).sum(), lambda v, a: v, diameter=np.inf, is_indicator=False)
    with pytest.raises(UnsupportedProblemError):
        run_smd(P, SmdConfig(N=3))
