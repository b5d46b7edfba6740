"""Exception types shared across the package."""


class EntlyapError(Exception):
    """Base class for all package errors."""


class DimensionError(EntlyapError, ValueError):
    """Matrix or vector dimensions are inconsistent with the operation."""


class ContractViolationError(EntlyapError, ValueError):
    """An input violates a documented precondition (e.g. non-Hermitian,

    mixed state passed to a pure-state-only measure, unsorted probability
    vector)."""


class ParameterError(EntlyapError, ValueError):
    """A parameter value is outside the supported range."""


class NumericalIntegrityError(EntlyapError, RuntimeError):
    """A quantity that must be real (or otherwise structurally constrained)

    came out with a residue too large to trust the computation."""


class ConfigError(EntlyapError, ValueError):
    """A run configuration is malformed or internally inconsistent."""
