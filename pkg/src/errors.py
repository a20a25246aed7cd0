"""Error hierarchy shared by all laboratory modules."""


class ResilienceLabError(Exception):
    """Base class for every error raised by the laboratory."""

    exit_code: int = 1


class ConfigError(ResilienceLabError):
    """Scenario configuration failed to parse or validate."""

    exit_code = 1


class DimensionError(ResilienceLabError, ValueError):
    """Matrix or signal dimensions do not match."""

    exit_code = 1


class NumericalError(ResilienceLabError):
    """A numerical routine failed."""

    exit_code = 2


class RiccatiError(NumericalError):
    """Riccati iteration did not converge or received indefinite weights."""


class UnstableSystemError(NumericalError):
    """A system or gain that must be Schur stable is not."""


class SingularSystemError(NumericalError):
    """A matrix that must be invertible is (numerically) singular."""


class QuantileError(NumericalError):
    """Quantile search did not converge."""


class DivergenceError(NumericalError):
    """Simulation state exceeded the divergence guard."""

    def __init__(self, message: str, step: int | None = None, norm: float | None = None):
        super().__init__(message)
        self.step = step
        self.norm = norm
