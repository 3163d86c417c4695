"""Exception taxonomy shared across the package.

Everything derives from SetupQueueError. ParameterError covers rejected
inputs (the CLI maps these to exit code 2); SimulationError covers runtime
failures inside the event loop.
"""

from __future__ import annotations


class SetupQueueError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SetupQueueError, ValueError):
    """Invalid model parameters or arguments."""


class NonPositiveRate(ParameterError):
    """A rate (mu or an arrival rate) was zero, negative, or not finite."""


class UnstableLoad(ParameterError):
    """rho outside (0, 1): the queue has no steady state."""


class ZeroServers(ParameterError):
    """k was not a positive integer."""


class NegativeSetup(ParameterError):
    """A setup duration was negative or not finite."""


class DegenerateDrift(ParameterError):
    """Busy-period drain formulas need strictly positive surplus capacity."""


class NoSurplusServers(ParameterError):
    """A bound that divides by k - R received k <= R."""


class BufferTooLarge(ParameterError):
    """Reserve allowance m exceeds what the formula or simulator supports."""


class HypothesisViolated(ParameterError):
    """Arguments fall outside the validity region of a tail formula."""


class InvalidLevel(ParameterError):
    """Passage-time level h must be an integer in [1, sqrt(R)]."""


class ZeroReference(ParameterError):
    """Relative error against a zero reference value is undefined."""


class InsufficientReplications(ParameterError):
    """Confidence intervals need at least two replications."""


class Unachievable(SetupQueueError):
    """No server count up to the search cap meets the waiting-time target.

    Deliberately not a ParameterError: the query is well formed, the
    answer is negative. The CLI reports it as a failure (exit 1), not as
    bad usage.
    """


class SimulationError(SetupQueueError, RuntimeError):
    """Runtime failure inside a simulation run."""


class EventCapExceeded(SimulationError):
    """The event budget ran out before the horizon was reached."""


class NonFiniteTime(SimulationError):
    """The simulation clock left the finite range."""


class CycleTimeout(SimulationError):
    """A regeneration cycle failed to close within its time allowance."""


class InvariantViolation(SimulationError):
    """A replayed trace contradicts the policy's bookkeeping rules.

    Carries the offending record and its index when raised by the trace
    validator.
    """

    def __init__(self, message: str, index: int | None = None, record=None):
        super().__init__(message)
        self.index = index
        self.record = record
