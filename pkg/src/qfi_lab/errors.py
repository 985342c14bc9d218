"""Exception types shared across the toolkit."""


class QFILabError(Exception):
    """Base class for every error raised by qfi_lab."""


class InvariantError(QFILabError):
    """A computed object violates one of its structural invariants."""


class ZeroQFIError(QFILabError):
    """The quantum Fisher information along the requested direction vanishes."""


class ConfigError(QFILabError, ValueError):
    """Malformed user configuration (probe spec, direction, file, ...)."""
