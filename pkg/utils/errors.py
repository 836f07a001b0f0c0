"""
Exception hierarchy for the reception toolkit.

Every error carries an exit code and a human readable detail, so the CLI
can report it the same way regardless of which layer raised it.
"""
from typing import Optional


class ReceptionError(Exception):
    """Base class: an error with a process exit code and a detail message."""

    exit_code = 2

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(ReceptionError):
    """Malformed command line input (bad sweep syntax, unsweepable variable)."""

    exit_code = 1


class ConfigError(ReceptionError):
    """Configuration could not be parsed or violates an invariant."""

    exit_code = 2


class DomainError(ReceptionError, ValueError):
    """An operation was called outside its mathematical domain."""

    exit_code = 2


class InfeasibleDoseError(DomainError):
    """The occupancy factor lies on or above the feasibility boundary f_star."""

    def __init__(self, f: float, f_star: float):
        super().__init__(
            f"occupancy factor f={f:g} is infeasible: the lower dose bound requires "
            f"f < f_star = K+/(1+K+) = {f_star:.17g}"
        )
        self.f = f
        self.f_star = f_star


class EmptyDoseIntervalError(ConfigError):
    """Q_min exceeds Q_max; the bounds are attached for reporting."""

    def __init__(self, bounds):
        super().__init__(
            f"dose interval is empty: Q_min/dt={bounds.q_min_rate:.6g} exceeds "
            f"Q_max/dt={bounds.q_max_rate:.6g}"
        )
        self.bounds = bounds


class DeadlockError(DomainError):
    """A reachable state has no outgoing transitions."""


class NumericalError(ReceptionError):
    """A computation left the range the stable evaluation can guard."""

    exit_code = 2


class BackendError(ReceptionError):
    """A replication backend did not deliver its results."""

    exit_code = 2


class ValidationFailure(ReceptionError):
    """Simulation disagreed with the analytical steady state."""

    exit_code = 3

    def __init__(self, detail: str, report=None):
        super().__init__(detail)
        self.report = report
