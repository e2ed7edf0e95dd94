"""Exception hierarchy shared by every module of the package."""


class RydEITError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 4


class NumericalError(RydEITError):
    exit_code = 4


class NotHermitian(NumericalError):
    pass


class Singular(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class DimensionMismatch(NumericalError, ValueError):
    pass


class DegenerateSteadyState(NumericalError):
    """The Liouvillian has more than one stationary state on the given support."""


class PhysicalityLost(NumericalError):
    pass


class EmptySpectrum(RydEITError, ValueError):
    pass


class EmptyData(RydEITError, ValueError):
    pass


class SchemaError(RydEITError, ValueError):
    exit_code = 2

    def __init__(self, message, key_path=""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class PhysicsError(RydEITError, ValueError):
    exit_code = 3
