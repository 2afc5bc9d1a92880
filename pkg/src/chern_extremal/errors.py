"""Exception types shared across the package."""


class ChernExtremalError(Exception):
    """Base class for all package errors."""


class ConventionError(ChernExtremalError):
    """An operation produced output violating a structural guarantee,
    e.g. a supposedly real field with a large imaginary residue."""


class NonConvergence(ChernExtremalError):
    """An iterative solve exhausted its budget above tolerance.

    Carries the partial solve report in ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IncompatibleRHS(ChernExtremalError):
    """Right-hand side has a component in the cokernel of the operator."""


class NonPositiveKernel(ChernExtremalError):
    """The computed null vector changes sign, so no positive representative exists."""


class NotGauduchon(ChernExtremalError):
    """A metric required to satisfy the vanishing-torsion condition does not."""


class ResidualTooLarge(ChernExtremalError):
    """A verification residual exceeded its ceiling despite solver convergence."""


class UnsupportedExponent(ChernExtremalError):
    """The requested functional exponent is outside the supported range."""


class AliasedMode(ChernExtremalError):
    """A requested Fourier mode is at or beyond the grid Nyquist frequency."""


class LostPositivity(ChernExtremalError):
    """A constructed metric fails the positivity margin."""


class FieldFormatError(ChernExtremalError):
    """A field or metric file is malformed or inconsistent with its header."""


class ScenarioError(ChernExtremalError):
    """A scenario document is malformed or fails validation."""
