"""Exception hierarchy shared by all unitri modules."""


class UnitriError(Exception):
    """Base class for every error raised by this package."""


class NonPrime(UnitriError, ValueError):
    pass


class DegreeOutOfRange(UnitriError, ValueError):
    pass


class DivisionByZero(UnitriError, ZeroDivisionError):
    pass


class FieldMismatch(UnitriError, ValueError):
    pass


class DimensionMismatch(UnitriError, ValueError):
    pass


class IndexOutOfRange(UnitriError, IndexError):
    pass


class DimensionTooSmall(UnitriError, ValueError):
    pass


class WrongCharacteristic(UnitriError, ValueError):
    pass


class NotASubgroup(UnitriError):
    pass


class TooLarge(UnitriError):
    pass


class ZeroDiagonalEntry(UnitriError, ValueError):
    pass


class ExponentOutOfRange(UnitriError, ValueError):
    pass


class NonAdditiveMap(UnitriError, ValueError):
    pass


class EvenCharacteristic(UnitriError, ValueError):
    pass


class NotGF2(UnitriError, ValueError):
    pass


class MalformedAutMap(UnitriError, ValueError):
    pass


class NotAnAutomorphism(UnitriError):
    """Raised by the decomposition pipeline when its input is not an automorphism."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class ResidualNotCentral(NotAnAutomorphism):
    pass


class ParseError(UnitriError, ValueError):
    pass
