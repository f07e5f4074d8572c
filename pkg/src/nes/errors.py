"""Exception types shared by the library and the command line."""


class NesError(Exception):
    """Base class for model errors."""


class InputError(NesError, ValueError):
    """Invalid parameters or input data."""


class ConvergenceError(NesError, ArithmeticError):
    """A numerical procedure did not reach its tolerance."""
