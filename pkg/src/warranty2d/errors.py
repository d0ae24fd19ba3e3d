"""Exception hierarchy for warranty2d."""


class Warranty2dError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(Warranty2dError, ValueError):
    """A parameter vector, hyperparameter set, or config value is invalid."""


class DomainError(Warranty2dError, ValueError):
    """A lifetime point lies outside the domain of the requested quantity."""


class DataError(Warranty2dError, ValueError):
    """A dataset file or record set cannot be parsed or fails validation."""


class FitError(Warranty2dError, RuntimeError):
    """Maximum-likelihood estimation failed."""


class QuadratureError(Warranty2dError, RuntimeError):
    """A quadrature self-check did not reach the required agreement."""


class McmcError(Warranty2dError, RuntimeError):
    """The sampler left its operating range (acceptance rate guard)."""


class ConfigError(Warranty2dError, ValueError):
    """A run configuration is inconsistent or incomplete."""
