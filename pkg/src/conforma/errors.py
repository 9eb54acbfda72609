"""Exception types shared across the toolkit."""


class ConformaError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ConformaError):
    """An argument is outside the operation's mathematical domain."""


class ConeError(ConformaError):
    """An eigenvalue vector is outside the operator's admissibility cone."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PositivityError(ConformaError):
    """A conformal factor or profile value is not strictly positive."""


class GeometryError(ConformaError):
    """A queried point or stencil leaves the field's domain."""


class SingularityError(ConformaError):
    """Evaluation was requested at (or too close to) a map pole."""


class ConvergenceError(ConformaError):
    """An iteration failed to converge; carries the last iterate when useful."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate
