"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DescentKitError(Exception):
    """Base class for all library errors."""


class MalformedSpec(DescentKitError):
    pass


class SchemaError(DescentKitError):
    def __init__(self, message: str, pointer: str = "") -> None:
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if pointer else message)


class TowerMismatch(DescentKitError):
    pass


class DivisionByZero(DescentKitError, ZeroDivisionError):
    pass


class NonFieldDetected(DescentKitError):
    """Inversion found a zero divisor; `factor` is the nontrivial gcd found."""

    def __init__(self, message: str, factor: object = None) -> None:
        self.factor = factor
        super().__init__(message)


class NotAUnit(DescentKitError):
    """A non-monomial element of a Laurent transcendental base was inverted."""


class EnumerationCap(DescentKitError):
    pass


class ZeroInput(DescentKitError):
    pass


class NonPositiveValuation(DescentKitError):
    pass


class RootNotInTower(DescentKitError):
    def __init__(self, message: str, polynomial: object = None) -> None:
        self.polynomial = polynomial
        super().__init__(message)


class SingularMatrix(DescentKitError):
    pass


class NotSmoothPoint(DescentKitError):
    pass


class PrecisionExhausted(DescentKitError):
    pass


class WildRamificationDetected(DescentKitError):
    pass


class NoMatch(DescentKitError):
    pass


class AmbiguousMatch(DescentKitError):
    pass


class NotAnIsomorphism(DescentKitError):
    pass


class NoSolutionOverField(DescentKitError):
    pass


class ScalarLiftFailure(DescentKitError):
    pass


class MarkingNotFixed(DescentKitError):
    pass


class DegenerateSupport(DescentKitError):
    pass


class NotGaloisStable(DescentKitError):
    pass


class MalformedDivisor(DescentKitError):
    pass


class IdentityFails(DescentKitError):
    def __init__(self, message: str, label: str = "") -> None:
        self.label = label
        super().__init__(message)


class PowerStructureFails(DescentKitError):
    def __init__(self, message: str, label: str = "") -> None:
        self.label = label
        super().__init__(message)


class PointNotOnCurve(DescentKitError):
    pass


class MapConstantOnCurve(DescentKitError):
    pass


class SubstitutionNonzero(DescentKitError):
    def __init__(self, message: str, label: str = "") -> None:
        self.label = label
        super().__init__(message)
