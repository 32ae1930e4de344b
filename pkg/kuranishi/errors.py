"""Exception hierarchy for the kuranishi package."""
from typing import Any, Optional


class KuranishiError(ValueError):
    """Base class for every error raised by the library."""


class SpecError(KuranishiError):
    """A spec file could not be parsed or references undeclared data."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class CutoffMismatchError(KuranishiError):
    """Two Novikov scalars carry different energy cutoffs."""


class CutoffExceededError(KuranishiError):
    """A requested cutoff exceeds the cutoffs the structure was built with."""


class ArityError(KuranishiError):
    """A multilinear map was applied to the wrong number of arguments."""


class DegreeError(KuranishiError):
    """An element or structure constant has the wrong degree."""


class ValuationError(KuranishiError):
    """An element expected in the maximal ideal has a valuation-0 coefficient."""


class LabelError(KuranishiError):
    """A basis label is unknown, duplicated or malformed."""


class LabelCollisionError(LabelError):
    """Dual labels of a cyclic completion collide with existing labels."""


class PairingDegreeError(KuranishiError):
    """The cyclic dimension of a pairing does not fit the module grading."""


class MisuseError(KuranishiError):
    """An operation was called outside the setting where it is meaningful."""


class FrobeniusError(KuranishiError):
    """A multiplication table fails one of the Frobenius algebra axioms."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        self.witness = witness
        super().__init__(f"{message}: {witness}" if witness is not None else message)


class DefinitenessError(KuranishiError):
    """A quadratic form required to be definite is not."""


class LinearizationNotSurjective(KuranishiError):
    """Newton mode cannot invert the valuation-0 part of m1."""


class IsotropyPreconditionError(KuranishiError):
    """zero_from_isotropy was called on a vector with Q(v, v) != 0."""


class CertificateError(KuranishiError):
    """A certificate chain produced an impossible intermediate state."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        self.witness = witness
        super().__init__(message)


class NonUnimodularError(KuranishiError):
    """A lattice operation requires determinant +1 or -1."""


class DegenerateGeometryError(KuranishiError):
    """A metric is not positive definite or a 4-plane is not of rank 4."""


class UnknownCommandError(KuranishiError):
    """The CLI was asked to run a command it does not know."""
