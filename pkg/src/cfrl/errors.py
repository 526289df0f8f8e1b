"""Exception hierarchy shared across the package.

Exit-code mapping used by the command line front end:
configuration problems -> 2, input problems -> 3, numerical failures -> 4.
"""


class CfrlError(Exception):
    """Base class for all package errors."""


class ConfigError(CfrlError):
    """Invalid option, hyperparameter, or run configuration."""


class InputError(CfrlError):
    """Problem with user-supplied data files or their declared schema."""


class ParseError(InputError):
    """Malformed input file; carries the offending location."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(InputError):
    """Declared columns and file contents disagree."""


class DimensionError(InputError):
    """Array blocks with incompatible shapes."""


class DegenerateBinningError(InputError):
    """Quantile binning requested on a column that cannot support it."""


class EmptyInputError(InputError):
    """An operation received an empty matrix or empty result set."""


class ParameterError(ConfigError):
    """A parameter object violates its invariants."""


class NumericalError(CfrlError):
    """Numerical failure inside an iterative routine.

    ``iteration`` and ``subgroup`` identify where the failure happened when
    known.
    """

    def __init__(self, message, iteration=None, subgroup=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        if subgroup is not None:
            message = f"{message} (subgroup {subgroup})"
        super().__init__(message)
        self.iteration = iteration
        self.subgroup = subgroup
