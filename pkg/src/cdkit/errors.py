"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`CdkitError`.  The four
intermediate classes map one-to-one onto CLI exit codes.
"""


class CdkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(CdkitError):
    """Invalid parameters, configuration or usage."""

    exit_code = 2


class DataError(CdkitError):
    """Unreadable, malformed or degenerate input data."""

    exit_code = 3


class NumericalError(CdkitError):
    """Singular systems, failed decompositions, non-convergence."""

    exit_code = 4


class GraphError(CdkitError):
    """A graph violates an operation's structural precondition."""

    exit_code = 2


# -- data ---------------------------------------------------------------------


class DataIOError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row: int, col: int, message: str = ""):
        self.row = row
        self.col = col
        super().__init__(f"parse error at row {row}, column {col}" + (f": {message}" if message else ""))


class DuplicateName(DataError):
    pass


class TooFewRows(DataError):
    pass


class ConstantColumn(DataError):
    def __init__(self, index: int, name: str | None = None):
        self.index = index
        label = f"{index}" if name is None else f"{index} ({name!r})"
        super().__init__(f"column {label} has zero variance")


class LengthMismatch(DataError):
    pass


class TooFewSamples(DataError):
    pass


class DegenerateSample(DataError):
    pass


# -- numerical ----------------------------------------------------------------


class SingularSubmatrix(NumericalError):
    pass


class DegenerateCorrelation(NumericalError):
    pass


class EigenFailure(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class ZeroResidualVariance(NumericalError):
    pass


class SolveFailure(NumericalError):
    pass


# -- graph --------------------------------------------------------------------


class NotADag(GraphError):
    pass


class MissingSepSet(GraphError):
    def __init__(self, i: int, j: int):
        self.pair = (min(i, j), max(i, j))
        super().__init__(f"no separating set recorded for non-adjacent pair {self.pair}")


class NodeCountMismatch(GraphError):
    pass


# -- configuration ------------------------------------------------------------


class BetaOutOfRange(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


class SpecInvalid(ConfigError):
    pass


class StageError(CdkitError):
    """Wraps an error raised inside a pipeline stage with the stage's name."""

    def __init__(self, stage: str, cause: CdkitError):
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
