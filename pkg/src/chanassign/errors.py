"""Exception types and the process exit codes used by the command line."""


class ChanAssignError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(ChanAssignError, ValueError):
    """Shapes or (M, N, A) dimensions are inconsistent."""


class ParameterError(ChanAssignError, ValueError):
    """A physical or configuration parameter is out of range."""


class SplitError(ChanAssignError, ValueError):
    """A dataset is too small to be split."""


class EncodingError(ChanAssignError, ValueError):
    """An assignment matrix violates the invariants needed to encode it."""


class DecodingError(ChanAssignError, ValueError):
    """A label vector violates the per-subchannel quota."""


class SizeGuardError(ChanAssignError, ValueError):
    """An instance is too large for exhaustive enumeration."""


class DataFormatError(ChanAssignError, ValueError):
    """A dataset or model file does not match the expected format."""


class ConvergenceError(ChanAssignError, RuntimeError):
    """The dual solver did not converge and repair was disabled.

    Carries the best iterate found so far (a SolveResult) when one exists.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class TrainingError(ChanAssignError, RuntimeError):
    """Training diverged. Carries the loss history up to the failure."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history if history is not None else []


# Exit codes for the CLI. Usage errors exit with 2 (argparse default).
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIMENSION = 4
EXIT_CONVERGENCE = 5
EXIT_SIZE_GUARD = 6
