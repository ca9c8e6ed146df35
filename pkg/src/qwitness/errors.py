"""Exception hierarchy shared by every qwitness module."""


class WitnessError(Exception):
    """Base class for all qwitness errors."""


class InvalidMatrixError(WitnessError, ValueError):
    pass


class NormalizationError(WitnessError, ValueError):
    pass


class ParameterError(WitnessError, ValueError):
    pass


class ModelError(WitnessError, ValueError):
    """A classical model breaks 0 <= f <= g or has a bad distribution."""


class PureStateRequiredError(WitnessError, ValueError):
    pass


class InfeasibleParameterError(WitnessError, ValueError):
    pass


class CapExceededError(WitnessError, RuntimeError):
    """Iteration cap hit; ``best`` holds the best point found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmptySampleError(WitnessError, ValueError):
    pass


class InsufficientSampleError(WitnessError, ValueError):
    pass


class PlanError(WitnessError, ValueError):
    pass


class NoThresholdError(WitnessError, ValueError):
    pass


class DocumentError(WitnessError, ValueError):
    """Malformed triple document. ``where`` names the line or field at fault."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
