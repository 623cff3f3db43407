"""Exception hierarchy shared by every module of the package."""


class PolarPairError(Exception):
    """Base class for all errors raised by :mod:`polarpairs`."""


class InvalidInputError(PolarPairError, ValueError):
    """An input violates a documented precondition."""


class ConstructionError(PolarPairError):
    """A construction could not produce a certified output.

    ``report`` carries whatever measurement led to the failure (a
    :class:`~polarpairs.verify.VerificationReport` or a plain dict).
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InternalInvariantError(ConstructionError):
    """A result that theory guarantees could not be certified numerically."""
