"""
Exception hierarchy shared by every module.

Input problems map to exit code 2 and numeric failures to exit code 3; the
command-line surface reads ``exit_code`` off the class instead of keeping its
own table.
"""


class BoundsError(Exception):
    exit_code = 3


class InputError(BoundsError, ValueError):
    exit_code = 2


class NumericError(BoundsError, ArithmeticError):
    exit_code = 3


# spectra
class NotSorted(InputError):
    pass


class NonFinite(InputError):
    pass


class EmptySpectrum(InputError):
    pass


class PrefixTooLong(InputError):
    pass


# profiles
class BadDensity(InputError):
    pass


class BadAngle(InputError):
    pass


class BadRatio(InputError):
    pass


class BadLambda1(InputError):
    pass


class BadDimension(InputError):
    pass


class NotSPD(InputError):
    pass


class NonPositiveP(InputError):
    pass


class BadProfileSpec(InputError):
    pass


# gap functions and solvers
class DomainError(InputError):
    pass


class LengthMismatch(InputError):
    pass


class NonPositiveWeight(InputError):
    pass


class ComplexRoots(NumericError):
    pass


class BracketFailure(NumericError):
    pass


# generators
class NonPositiveDensity(InputError):
    pass


class CountTooLarge(InputError):
    pass


class BadSourceSpec(InputError):
    pass


class GeneratorMismatch(NumericError):
    pass


# verification
class MissingNextEigenvalue(InputError):
    pass


class GNotMonotone(InputError):
    pass


class GNegative(InputError):
    pass


class QuadratureNonConvergence(NumericError):
    pass


# command line
class BadConfig(InputError):
    pass
