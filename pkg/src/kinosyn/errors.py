"""Exception hierarchy; the CLI maps each class to an exit code."""


class KinosynError(Exception):
    exit_code = 2


class ParameterError(KinosynError, ValueError):
    """A numeric parameter is outside its allowed range."""

    exit_code = 1


class StructuralError(KinosynError, ValueError):
    """Shapes, lengths or labels of the inputs do not line up."""

    exit_code = 2


class NonFiniteError(StructuralError):
    """Input contains NaN or Inf; ``index`` names the first offender."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DataParseError(KinosynError, ValueError):
    def __init__(self, message, path=None, row=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.path = path
        self.row = row
        self.column = column


class DegenerateInputError(KinosynError, ArithmeticError):
    """The input admits no meaningful answer (e.g. an all-zero matrix)."""

    exit_code = 3
