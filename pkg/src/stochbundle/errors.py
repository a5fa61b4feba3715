"""Exception types raised by the solvers, oracles and harness."""


class InvalidArgumentError(ValueError):
    """A parameter is outside its admissible range."""


class OracleError(RuntimeError):
    """A first-order or prox oracle failed (e.g. inner solver did not converge)."""


class UnboundedCycleError(OracleError):
    """A (B2) cycle length cannot be computed because the gap is infinite."""


class UnsupportedProblemError(TypeError):
    """The solver cannot handle this kind of problem."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
