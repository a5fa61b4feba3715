"""Stochastic test problems and instance files.

Instance files are JSON documents holding every generated constant (floats
are written with ``repr`` precision, so a reload is bit-exact).
"""

import json

from .base import CompositeProblem
from .portfolio import (
    PortfolioInstance,
    PortfolioProblem,
    expected_max_affine_normal,
    generate_portfolio_instance,
    portfolio_exact_phi,
    portfolio_oracle,
    upper_envelope,
)
from .synthetic import DeterministicQuadratic, make_deterministic_quadratic
from .twostage import (
    RecourseResult,
    TwoStageProblem,
    TwoStageQuadInstance,
    generate_twostage_instance,
    recourse_residual,
    solve_recourse,
    solve_recourse_batch,
    solve_recourse_exact,
    solve_recourse_exact_batch,
    twostage_oracle,
)

FAMILIES = ("portfolio", "twostage")

_INSTANCE_TYPES = {"portfolio": PortfolioInstance, "twostage": TwoStageQuadInstance}


def generate_instance(family, n, rng, seed=None, **params):
    if family == "portfolio":
        return generate_portfolio_instance(n, rng, seed=seed, **params)
    if family == "twostage":
        return generate_twostage_instance(n, rng, seed=seed, **params)
    raise ValueError(f"unknown problem family {family!r}; expected one of {FAMILIES}")


def make_problem(instance, **options):
    if isinstance(instance, PortfolioInstance):
        return PortfolioProblem(instance)
    if isinstance(instance, TwoStageQuadInstance):
        return TwoStageProblem(instance, **options)
    raise TypeError(f"not an instance: {instance!r}")


def save_instance(instance, path):
    with open(path, "w") as fh:
        json.dump(instance.to_dict(), fh, indent=1)
        fh.write("\n")


def load_instance(path):
    with open(path) as fh:
        d = json.load(fh)
    try:
        cls = _INSTANCE_TYPES[d["family"]]
    except KeyError as exc:
        raise ValueError(f"{path}: unknown or missing instance family") from exc
    return cls.from_dict(d)
