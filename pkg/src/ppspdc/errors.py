"""Exception hierarchy shared across the package.

The CLI maps each family onto a process exit code (see ``cli.EXIT_CODES``).
"""


class SpdcError(Exception):
    """Base class for all package errors."""


class ConfigError(SpdcError):
    """Invalid run configuration; the message names the field and the rule."""


class DomainError(SpdcError):
    """A physically or numerically invalid request."""


class OutOfValidityRange(DomainError):
    def __init__(self, quantity, value, interval):
        self.quantity = quantity
        self.value = value
        self.interval = tuple(interval)
        super().__init__(
            f"{quantity}={value!r} outside dispersion-fit validity {self.interval}"
        )


class NoPhaseMatch(DomainError):
    pass


class ChirpTooStrong(DomainError):
    pass


class NoTransverseMatch(DomainError):
    pass


class NoHalfCrossing(DomainError):
    pass


class DegenerateInput(DomainError):
    pass


class NotNormalized(DomainError):
    pass


class GridTooCoarse(SpdcError):
    """The sampling grid does not resolve the structure it is asked to integrate."""
