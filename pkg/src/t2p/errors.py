"""Exception hierarchy shared across the package."""


class T2PError(Exception):
    """Base class for all errors raised by t2p."""


class DimensionError(T2PError, ValueError):
    """Array shapes are incompatible."""


class ContractError(T2PError, ValueError):
    """A documented precondition of an operation was violated."""


class DomainError(T2PError, ValueError):
    """A value lies outside the mathematical domain of a function."""


class ConfigurationError(T2PError, ValueError):
    """Invalid or inconsistent configuration."""


class InputError(T2PError, ValueError):
    """User-supplied data cannot be processed."""


class DataFormatError(InputError):
    """A data file is malformed."""


class DivergenceError(T2PError, FloatingPointError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, learning_rate, value):
        self.epoch = epoch
        self.learning_rate = learning_rate
        self.value = value
        super().__init__(
            f"non-finite loss ({value}) at epoch {epoch} with learning rate {learning_rate:g}"
        )
