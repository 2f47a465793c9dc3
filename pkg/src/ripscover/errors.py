"""Exception types shared across the package."""


class RipscoverError(Exception):
    """Base class for package errors."""


class ValidationError(RipscoverError):
    """Bad input data (files, parameters, invariant violations)."""


class CarrierMismatch(RipscoverError):
    """Operands live on different point sets."""


class ChainError(RipscoverError):
    """Invalid chain; `position` is the first offending link when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class MoveError(RipscoverError):
    """A chain move violated its triangle or adjacency condition."""


class CertificateError(RipscoverError):
    """A homotopy certificate is malformed or fails to replay."""
