class BDFError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(BDFError, ValueError):
    """Invalid input parameters or configuration document."""


class LatticeMismatchError(BDFError, ValueError):
    """Operands are defined on different momentum lattices."""


class RetractionError(BDFError, ArithmeticError):
    """A near-projector has an eigenvalue too close to 1/2 to be rounded."""


class DivergenceError(BDFError, RuntimeError):
    """The integrator left the configured norm bound or produced non-finite values."""
