"""Exception and warning classes raised by matrixchaos."""


class MatrixChaosError(Exception):
    """Base class for all library errors."""


class InputError(MatrixChaosError, ValueError):
    """Invalid matrix input or ensemble specification."""


class ParseError(InputError):
    pass


class HermiticityError(InputError):
    pass


class DisconnectedError(InputError):
    pass


class EmptyGraphError(InputError):
    pass


class InfeasibleSpec(InputError):
    pass


class DimensionCap(InputError):
    pass


class ZeroVector(InputError):
    pass


class NotBipartiteError(InputError):
    pass


class NumericalError(MatrixChaosError, ArithmeticError):
    """A numerical routine failed or its result violates a contract."""


class EigensolveFailure(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class InconsistentAmplitudes(NumericalError):
    pass


class ZeroAmplitude(NumericalError):
    pass


class EnumerationCap(MatrixChaosError, ValueError):
    pass


class GridTooCoarse(UserWarning):
    """Two located roots are closer than twice the scan step."""
