class CoolerError(Exception):
    exit_code = 1


class ConfigError(CoolerError):
    exit_code = 2

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class LayoutError(ConfigError):
    pass


class NumericalError(CoolerError):
    exit_code = 3


class StepSizeError(NumericalError):
    pass


class TraceDriftError(NumericalError):
    pass


class NonFiniteError(NumericalError):
    pass


class DegenerateSteadyStateError(NumericalError):
    pass


class SingularResolventError(NumericalError):
    pass


class RateInvariantError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class FitWindowError(FitError):
    pass


class NoCoolingCellError(NumericalError):
    pass


class SweepFailedError(NumericalError):
    def __init__(self, message, grid=None):
        super().__init__(message)
        self.grid = grid


class PartialSweepFailure(CoolerError):
    """Raised by the CLI after writing results when some cells failed."""

    exit_code = 4
