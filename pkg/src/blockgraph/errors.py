"""Exception types raised across the pipeline."""


class InvalidParameterError(ValueError):
    pass


class SingularMatrixError(ArithmeticError):
    pass


class NumericalFailureError(RuntimeError):
    """A numerical routine did not converge or hit a singular system.

    ``column`` is set when the failure belongs to one CLIME column.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class EmptyCorpusError(ValueError):
    pass


class ParseError(ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class IngestionError(ParseError):
    pass
