"""Shared exception types."""


class WmlError(Exception):
    """Base class for all errors raised by this package."""


class ExprSyntaxError(WmlError):
    """Malformed expression text.

    Carries the offset of the offending token and the set of tokens that
    would have been accepted there.
    """

    def __init__(self, message, position, expected=()):
        super().__init__(f"{message} at offset {position}" +
                         (f", expected one of {sorted(expected)}" if expected else ""))
        self.position = position
        self.expected = frozenset(expected)


class UnknownIdentifier(WmlError):
    def __init__(self, name, position):
        super().__init__(f"unknown identifier {name!r} at offset {position}")
        self.name = name
        self.position = position


class DomainError(WmlError):
    """Evaluation left the real domain (log of non-positive, 0^negative, ...)."""


class ValidationError(WmlError):
    """A manifold or preset violates a structural invariant."""


class UnknownPreset(WmlError):
    pass


class QuadratureError(WmlError):
    pass


class OverflowSignal(WmlError):
    """Quantity exceeded the floating range; caller should use log-space."""


class NoConvergence(WmlError):
    """An exhaustion / doubling loop did not stabilize.

    ``history`` keeps the sequence of iterates so the failure is auditable.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ShootingFailure(WmlError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class StepUnderflow(WmlError):
    """Adaptive SDE time step fell below the floor (runaway drift)."""
