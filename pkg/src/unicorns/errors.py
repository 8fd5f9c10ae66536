"""Exception hierarchy shared by the library and the command line."""


class UnicornError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class ParameterError(UnicornError, ValueError):
    exit_code = 2


class ConstraintError(ParameterError):
    """A parameter combination violates a documented side condition."""


class DataError(UnicornError, ValueError):
    exit_code = 3


class DegenerateInputError(DataError):
    """Input is valid but degenerate (constant series, all duplicates...)."""


class NumericError(UnicornError, RuntimeError):
    exit_code = 4
