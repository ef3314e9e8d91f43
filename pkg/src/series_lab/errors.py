"""Exception hierarchy shared by every module."""


class SeriesLabError(Exception):
    """Base class for all errors raised by series_lab."""


class DomainError(SeriesLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularError(DomainError):
    """A pivot (leading coefficient, divisor) is numerically zero."""


class NotNormalizedError(DomainError):
    pass


class NotAZeroError(DomainError):
    pass


class IdenticallyZeroError(DomainError):
    pass


class PreconditionError(DomainError):
    pass


class ContinuationBlocked(DomainError):
    def __init__(self, message, center=None):
        super().__init__(message)
        self.center = center


class CatalogLookupError(SeriesLabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnsupportedError(SeriesLabError):
    pass


class ConfigError(SeriesLabError, ValueError):
    pass


class BudgetError(SeriesLabError):
    """The term budget ran out before the requested result was reached.

    ``partial`` carries whatever was computed up to that point.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ParseError(SeriesLabError, ValueError):
    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line


class ValidationError(ParseError):
    pass
