"""Exception hierarchy shared by every orbitkit module."""


class OrbitkitError(Exception):
    """Base class for all orbitkit errors."""


class DomainError(OrbitkitError, ValueError):
    """An input violates an operation's precondition."""


class NumericalError(OrbitkitError, ArithmeticError):
    """A numerical procedure failed (non-convergence, lost matching, ...)."""


class ShiftRequiredError(NumericalError, OverflowError):
    """An exponent would overflow double precision.

    Both orbit integrals are shift covariant: adding ``c*I`` to one argument
    multiplies the value by ``exp(-c * trace(other))``. Shift the spectrum
    towards zero and rescale the result instead.
    """


class SizeError(DomainError):
    """The requested dimension exceeds what an exhaustive method supports."""
