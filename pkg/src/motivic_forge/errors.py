"""Exception hierarchy shared by every module.

All errors derive from :class:`MotivicError` so the CLI can map them to an
input-error exit code with a single ``except``.
"""


class MotivicError(Exception):
    """Base class for all library errors."""


class NotDivisible(MotivicError):
    pass


class UnknownBuiltin(MotivicError):
    pass


class FractionalExponent(MotivicError):
    pass


class NoShift(MotivicError):
    pass


class InsufficientPrecision(MotivicError):
    pass


class NotAComplex(MotivicError):
    pass


class NotTorsion(MotivicError):
    pass


class UnsupportedFamily(MotivicError):
    pass


class GenericPointViolation(MotivicError):
    """The arc lies in the exceptional locus to working precision."""


class ZeroComponentOrder(MotivicError):
    pass


class TooLarge(MotivicError):
    pass


class NotStabilized(MotivicError):
    pass


class VerificationFailed(MotivicError):
    def __init__(self, message, ledger=None):
        super().__init__(message)
        self.ledger = ledger or {}


class NotLogTerminal(MotivicError):
    pass


class CertificateFailed(MotivicError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class UnknownLabel(MotivicError):
    pass


class ParseError(MotivicError):
    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position
