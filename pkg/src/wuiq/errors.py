"""Shared exception types.

Every error raised by the library derives from WuiqError so callers can
distinguish validation problems (bad input data) from genuine bugs.
"""


class WuiqError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ValidationError(WuiqError):
    """Input data violates a documented contract.

    ``field`` optionally names the offending field (dotted path), and
    ``details`` carries a list of per-record messages for batch input.
    """

    code = "invalid_field"

    def __init__(self, message, field=None, details=None):
        super().__init__(message)
        self.field = field
        self.details = list(details) if details else []


class ConfigurationError(WuiqError):
    """A named provider, option, or configuration value is unknown."""

    code = "configuration"
