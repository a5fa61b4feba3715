"""Experiment configuration files.

The format is flat ``key = value`` lines with dotted keys, ``#`` comments::

    base_seed = 7
    problem.family = portfolio
    problem.n = 100
    eval.checkpoints = 3, 4, 5, 10, 100
    method.1.name = B19
    method.1.variant = B1
    method.1.tau = 0.9
    method.1.lambda = 0.001
    method.1.C = 1
    method.1.K = 800
    method.2.variant = SMD
    method.2.N = 100000
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from typing import Optional

from ..errors import ConfigError

_SECTION = "experiment"


@dataclass(frozen=True)
class MethodSpec:
    name: str
    variant: str  # B1, B2 or SMD
    lam: Optional[float] = None
    tau: Optional[float] = None
    theta: Optional[float] = None
    C: Optional[float] = None
    K: Optional[int] = None
    N: Optional[int] = None
    max_total_iters: int = 10_000_000

    @property
    def is_smd(self):
        return self.variant == "SMD"

    def validate(self):
        if self.variant not in ("B1", "B2", "SMD"):
            raise ConfigError(f"method {self.name}: variant must be B1, B2 or SMD")
        if self.is_smd:
            if self.N is None or self.N < 1:
                raise ConfigError(f"method {self.name}: SMD needs N >= 1")
            if self.theta is not None and not self.theta > 0:
                raise ConfigError(f"method {self.name}: theta must be positive")
            return
        missing = [k for k in ("lam", "C", "K") if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"method {self.name}: missing {', '.join(missing)}")
        if (self.tau is None) == (self.theta is None):
            raise ConfigError(f"method {self.name}: give exactly one of tau or theta")


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "portfolio"
    n: int = 100
    instance_seed: Optional[int] = None
    instance_file: Optional[str] = None
    breakpoints: int = 10
    lambda0: float = 2.0
    recourse: str = "exact"
    methods: tuple = ()
    eval_n: int = 1000
    checkpoints: tuple = ()
    base_seed: int = 0
    trials: int = 1
    output: Optional[str] = None
    timing: bool = True
    jobs: int = 1

    def validate(self):
        if self.family not in ("portfolio", "twostage", "quadratic"):
            raise ConfigError(f"unknown problem.family {self.family!r}")
        if self.n < 1:
            raise ConfigError("problem.n must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.eval_n < 2:
            raise ConfigError("eval.n_samples must be >= 2")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ConfigError("eval.checkpoints must be strictly increasing")
        if any(c < 1 for c in self.checkpoints):
            raise ConfigError("eval.checkpoints must be positive")
        if not self.methods:
            raise ConfigError("no methods configured")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate method names in {names}")
        for m in self.methods:
            m.validate()
        return self

    @property
    def effective_instance_seed(self):
        return self.base_seed if self.instance_seed is None else self.instance_seed


_TOP = {
    "base_seed": ("base_seed", int),
    "trials": ("trials", int),
    "output": ("output", str),
    "jobs": ("jobs", int),
    "problem.family": ("family", str),
    "problem.n": ("n", int),
    "problem.seed": ("instance_seed", int),
    "problem.instance_file": ("instance_file", str),
    "problem.breakpoints": ("breakpoints", int),
    "problem.lambda0": ("lambda0", float),
    "problem.recourse": ("recourse", str),
    "eval.n_samples": ("eval_n", int),
    "eval.checkpoints": ("checkpoints", "ints"),
    "report.timing": ("timing", "bool"),
}

_METHOD = {
    "name": ("name", str),
    "variant": ("variant", str),
    "lambda": ("lam", float),
    "tau": ("tau", float),
    "theta": ("theta", float),
    "c": ("C", float),
    "k": ("K", int),
    "n": ("N", int),
    "max_total_iters": ("max_total_iters", int),
}

_METHOD_KEY = re.compile(r"^method\.(\w+)\.(\w+)$")


def _convert(key, raw, kind):
    try:
        if kind == "ints":
            return tuple(int(p) for p in raw.replace(",", " ").split())
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind is int:
            val = float(raw)
            if val != int(val):
                raise ValueError(raw)
            return int(val)
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc


def parse_pairs(pairs):
    """Build an :class:`ExperimentConfig` from ``(key, value)`` string pairs."""
    top = {}
    methods = {}
    for key, raw in pairs:
        key = key.strip()
        if key in _TOP:
            attr, kind = _TOP[key]
            top[attr] = _convert(key, raw, kind)
            continue
        m = _METHOD_KEY.match(key)
        if m is None or m.group(2).lower() not in _METHOD:
            raise ConfigError(f"unknown config key {key!r}")
        attr, kind = _METHOD[m.group(2).lower()]
        methods.setdefault(m.group(1), {})[attr] = _convert(key, raw, kind)

    def order(label):
        return (0, int(label), "") if label.isdigit() else (1, 0, label)

    specs = []
    for label in sorted(methods, key=order):
        fields = methods[label]
        if "variant" not in fields:
            raise ConfigError(f"method.{label}: missing variant")
        fields["variant"] = fields["variant"].upper()
        fields.setdefault("name", label if not label.isdigit() else f"{fields['variant']}-{label}")
        specs.append(MethodSpec(**fields))
    return ExperimentConfig(methods=tuple(specs), **top)


def read_pairs(text, source="<config>"):
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return list(parser.items(_SECTION))


def load_config(path, overrides=()):
    """Read ``path`` and apply ``key=value`` override strings on top."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    pairs = read_pairs(text, source=str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return parse_pairs(pairs).validate()


def with_overrides(config, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, **changes).validate()
