"""Stochastic composite proximal bundle method with a single aggregated cut."""

from .baselines import SmdConfig, run_smd
from .core import (
    AggregateCut,
    CycleRecord,
    IterateRecord,
    RunRecord,
    RunState,
    SolverConfig,
    blend_cut,
    gamma_lambda_value,
    prox_step,
    serious_cut,
    tau_from_theta,
    theta_from_tau,
    update_u,
    update_y,
)
from .errors import (
    ConfigError,
    InvalidArgumentError,
    OracleError,
    UnboundedCycleError,
    UnsupportedProblemError,
)
from .prox import ProxOperator, ball_indicator, project_ball, project_simplex, simplex_indicator
from .scpb import (
    CycleRule,
    cycle_length_b1,
    cycle_length_b2,
    cycle_size_bound_b1,
    recommended_config,
    run_scpb,
)
from .streams import SampleStream

__version__ = "0.1.0"
