from __future__ import annotations


class GpiaError(Exception):
    """Base class for every error raised by the gpia app."""

    def __init__(self, message: str, *, iteration: int | None = None):
        super().__init__(message)
        self.message = message
        self.iteration = iteration

    def __str__(self) -> str:
        if self.iteration is None:
            return self.message
        return f"Iteracao {self.iteration}: {self.message}"


class ArgumentError(GpiaError, ValueError):
    pass


class ConfigError(GpiaError, ValueError):
    pass


class NumericalError(GpiaError):
    pass


class SolverError(NumericalError):
    def __init__(self, message: str, *, node: int | None = None, **kwargs):
        super().__init__(message, **kwargs)
        self.node = node


class ScalingBoundError(NumericalError):
    pass


class RuleMismatchError(NumericalError):
    pass


class CertificateError(NumericalError):
    pass
