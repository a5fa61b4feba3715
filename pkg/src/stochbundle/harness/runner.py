"""Run every configured method on one instance and emit CSV reports."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import SmdConfig, run_smd
from ..core import SolverConfig
from ..errors import ConfigError, InvalidArgumentError, OracleError, UnsupportedProblemError
from ..problems import generate_instance, load_instance, make_deterministic_quadratic, make_problem
from ..scpb import run_scpb
from ..streams import ALGORITHM, EVALUATION, INSTANCE, SampleStream
from .estimate import EvaluationSample

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "method",
    "trial",
    "checkpoint_kind",
    "outer_k",
    "inner_j",
    "wall_ms",
    "obj_mean",
    "obj_half_ci",
    "u_hat",
    "cycle_len",
]

SUMMARY_COLUMNS = [
    "method",
    "trial",
    "outer_iters",
    "inner_iters",
    "wall_ms",
    "obj_mean",
    "obj_half_ci",
    "status",
]


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else format(float(value), ".17g")
    return str(value)


def build_instance(config):
    """The instance shared by all methods (``None`` for the quadratic family)."""
    if config.instance_file:
        return load_instance(config.instance_file)
    if config.family == "quadratic":
        return None
    seed = config.effective_instance_seed
    rng = SampleStream.derive(seed, INSTANCE).generator()
    params = {"n_breakpoints": config.breakpoints} if config.family == "portfolio" else {"lambda0": config.lambda0}
    return generate_instance(config.family, config.n, rng, seed=seed, **params)


def build_problem(config, instance):
    if instance is None:
        z = np.zeros(config.n)
        z[0] = 2.0
        return make_deterministic_quadratic(config.n, z)
    options = {"recourse": config.recourse} if config.family == "twostage" else {}
    return make_problem(instance, **options)


@dataclass
class MethodResult:
    spec_name: str
    trial: int
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failed: bool = False


def _run_one(config, instance, method_index, trial):
    spec = config.methods[method_index]
    problem = build_problem(config, instance)
    evaluator = EvaluationSample(problem, SampleStream.derive(config.base_seed, EVALUATION, trial), config.eval_n)
    stream = SampleStream.derive(config.base_seed, ALGORITHM, trial, method_index)
    ms = (lambda v: v) if config.timing else (lambda v: 0.0)
    result = MethodResult(spec.name, trial)

    def row(kind, outer, inner, wall, x, u_hat=None, cycle_len=None):
        mean, half = evaluator.estimate(x)
        return {
            "method": spec.name, "trial": trial, "checkpoint_kind": kind, "outer_k": outer,
            "inner_j": inner, "wall_ms": ms(wall), "obj_mean": mean, "obj_half_ci": half,
            "u_hat": u_hat, "cycle_len": cycle_len,
        }

    try:
        if spec.is_smd:
            cfg = SmdConfig(N=spec.N, theta_smd=spec.theta if spec.theta is not None else 1.0)
            rec = run_smd(problem, cfg, stream, checkpoints=config.checkpoints, name=spec.name)
            for it in rec.iterates:
                if it.t in config.checkpoints:
                    result.rows.append(row("iter", it.t, it.t, it.wall_ms, it.x_avg))
            final = row("final", spec.N, spec.N, rec.wall_ms, rec.y_avg)
            outer = spec.N
        else:
            cfg = SolverConfig(
                lam=spec.lam, K=spec.K, C=spec.C, variant=spec.variant, tau=spec.tau,
                theta=spec.theta, max_total_iters=spec.max_total_iters,
            )
            rec = run_scpb(problem, cfg, stream, name=spec.name)
            for c in rec.cycles:
                if c.k in config.checkpoints:
                    y, u = rec.averaged_output(c.k)
                    result.rows.append(row("cycle", c.k, c.j_k, c.wall_ms, y, u, c.cycle_len))
            outer = len(rec.cycles)
            last_len = rec.cycles[-1].cycle_len if rec.cycles else None
            final = row("final", outer, rec.total_inner_iters, rec.wall_ms, rec.y_avg, rec.u_avg, last_len)
        result.rows.append(final)
        status = "ok"
        if rec.aborted:
            status = "aborted"
            result.failed = True
            logger.warning("%s trial %d aborted: %s", spec.name, trial, rec.abort_reason)
        result.summary = {
            "method": spec.name, "trial": trial, "outer_iters": outer, "inner_iters": rec.total_inner_iters,
            "wall_ms": ms(rec.wall_ms), "obj_mean": final["obj_mean"], "obj_half_ci": final["obj_half_ci"],
            "status": status,
        }
    except (OracleError, InvalidArgumentError, UnsupportedProblemError) as exc:
        logger.error("%s trial %d failed: %s", spec.name, trial, exc)
        result.failed = True
        result.summary = {
            "method": spec.name, "trial": trial, "outer_iters": None, "inner_iters": None,
            "wall_ms": None, "obj_mean": None, "obj_half_ci": None, "status": f"error: {exc}",
        }
    return result


@dataclass
class ComparisonResult:
    rows: list
    summary: list
    failed: bool
    paths: dict = field(default_factory=dict)


def run_comparison(config, methods=None):
    """Run the selected methods (default: all) for every trial.

    Every method sees the same instance and, within a trial, the same fixed
    evaluation sample; each (trial, method) pair draws from its own
    algorithm stream. Writes ``trace.csv`` and ``summary.csv`` under
    ``config.output`` when it is set.
    """
    names = [m.name for m in config.methods]
    if methods is None:
        indices = list(range(len(names)))
    else:
        unknown = [m for m in methods if m not in names]
        if unknown:
            raise ConfigError(f"unknown method(s) {unknown}; configured: {names}")
        indices = [names.index(m) for m in methods]
    instance = build_instance(config)
    tasks = [(config, instance, mi, trial) for trial in range(config.trials) for mi in indices]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_one, *zip(*tasks)))
    else:
        results = [_run_one(*t) for t in tasks]
    rows = [r for res in results for r in res.rows]
    summary = [res.summary for res in results]
    out = ComparisonResult(rows, summary, any(res.failed for res in results))
    if config.output:
        os.makedirs(config.output, exist_ok=True)
        out.paths["trace"] = write_csv(os.path.join(config.output, "trace.csv"), CSV_COLUMNS, rows)
        out.paths["summary"] = write_csv(os.path.join(config.output, "summary.csv"), SUMMARY_COLUMNS, summary)
        if instance is not None:
            from ..problems import save_instance

            out.paths["instance"] = os.path.join(config.output, "instance.json")
            save_instance(instance, out.paths["instance"])
    return out


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([fmt(r.get(c)) for c in columns])
    return path


def format_summary(summary):
    """Plain-text table of the summary rows."""
    header = ["method", "trial", "outer", "inner", "wall ms", "objective", "+/-", "status"]
    lines = []
    for s in summary:
        def num(v, spec):
            return "-" if v is None else format(v, spec)

        lines.append([
            s["method"], str(s["trial"]), num(s["outer_iters"], "d"), num(s["inner_iters"], "d"),
            num(s["wall_ms"], ".1f"), num(s["obj_mean"], ".6g"), num(s["obj_half_ci"], ".2g"), s["status"],
        ])
    widths = [max(len(h), *(len(l[i]) for l in lines)) if lines else len(h) for i, h in enumerate(header)]
    fmt_line = "  ".join("{:<%d}" % w for w in widths)
    return "\n".join([fmt_line.format(*header)] + [fmt_line.format(*l) for l in lines])
