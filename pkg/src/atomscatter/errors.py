"""Exception types raised across the package."""


class ScatterError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ScatterError, ValueError):
    pass


class SamplingExhaustedError(ScatterError, RuntimeError):
    pass


class SingularPairError(ScatterError, ValueError):
    """Two atoms closer than the kernel's minimum separation."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class CapacityError(ScatterError, ValueError):
    pass


class NonUniqueSteadyStateError(ScatterError, RuntimeError):
    pass


class IllConditionedError(ScatterError, RuntimeError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class UndefinedTransmissionError(ScatterError, ValueError):
    pass


class FitFailedError(ScatterError, RuntimeError):
    def __init__(self, message, params=None, residual=None):
        super().__init__(message)
        self.params = params
        self.residual = residual


class ConfigError(ScatterError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
