"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter is outside its allowed range."""


class DomainError(ValueError):
    """A formula is evaluated outside the region where it is defined."""


class GridError(ValueError):
    """A momentum/position grid cannot support the requested operation."""


class ConfigError(ValueError):
    """Scenario or sweep configuration is malformed.

    ``field`` is the dotted path of the offending entry and ``line`` the
    1-based source line when the config came from a file.
    """

    def __init__(self, message, field=None, line=None):
        self.message = message
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NumericalValidationError(RuntimeError):
    """A computed result breaches a conservation law or other invariant."""
