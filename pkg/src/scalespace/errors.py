"""Exception hierarchy.

Every error carries a ``category`` used by the CLI to pick an exit code:
``usage`` (1), ``input`` (2), ``numerical`` (3), ``io`` (4).
"""


class ScaleSpaceError(Exception):
    category = "usage"


# -- input data ------------------------------------------------------------

class InputError(ScaleSpaceError):
    category = "input"


class RowError(InputError):
    """A parse problem tied to a 1-based line of the input text."""

    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


class MalformedRow(RowError):
    pass


class NonFiniteValue(RowError):
    pass


class NonPositiveStderr(RowError):
    pass


class NonMonotoneTimes(RowError):
    pass


class TooFewPoints(InputError):
    pass


class DegenerateSpacing(InputError):
    pass


# -- configuration ---------------------------------------------------------

class ConfigError(ScaleSpaceError):
    category = "usage"


class InvalidSpec(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


class RhoOutOfRange(ConfigError):
    pass


class InvalidRange(ConfigError):
    pass


class LevelOutOfRange(ConfigError):
    pass


# -- numerics --------------------------------------------------------------

class NumericalError(ScaleSpaceError):
    category = "numerical"


class CholeskyFailure(NumericalError):
    pass


class NonFiniteDraw(NumericalError):
    pass


class DegenerateWindow(NumericalError):
    pass


class DimensionMismatch(NumericalError):
    pass
