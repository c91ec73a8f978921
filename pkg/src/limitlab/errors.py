"""Exception types shared across the package."""


class LimitLabError(Exception):
    """Base class for contract violations raised by this package."""


class InfiniteMassError(LimitLabError):
    """A mass query on an infinite-mass measure had no finite evaluation region."""


class ZeroMassRestrictionError(LimitLabError):
    """Restriction to a set that carries no mass cannot be normalized."""


class EnumerationLimitError(LimitLabError):
    """An exact count would require enumerating more than the practicality ceiling."""


class FiltrationError(LimitLabError):
    """A filtration schedule could not be certified on the requested horizon."""


class ConfigError(LimitLabError):
    """An experiment configuration failed strict validation."""
