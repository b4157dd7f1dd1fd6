"""Exception types raised across the package."""


class NSpecError(Exception):
    """Base class for all package errors."""


class DegenerateSpectrum(NSpecError, ValueError):
    """The three dressed energies coincide (p below threshold); Theta is undefined."""


class InternalConsistencyError(NSpecError, ArithmeticError):
    """A computed quantity left its mathematically allowed range by more than rounding."""


class NoConvergence(NSpecError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class EmptyGrid(NSpecError, ValueError):
    pass


class NoAnticrossing(NSpecError, ValueError):
    """The branch gap has no interior minimum on the scan window."""


class InvalidQuantumNumbers(NSpecError, ValueError):
    pass


class NotAnNConfiguration(NSpecError, ValueError):
    pass


class SingularJacobian(NSpecError, ArithmeticError):
    pass


class RankDeficient(NSpecError, ArithmeticError):
    pass


class EmptySeries(NSpecError, ValueError):
    pass


class ParseError(NSpecError, ValueError):
    """Malformed input row. ``line`` is the 1-based line number in the file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidBranching(NSpecError, ValueError):
    pass


class DegenerateKernel(NSpecError, ArithmeticError):
    """The Liouvillian has more than one steady state."""

    def __init__(self, message, dimension=None):
        self.dimension = dimension
        super().__init__(message)
