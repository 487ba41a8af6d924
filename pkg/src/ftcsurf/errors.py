"""Exception hierarchy shared by all ftcsurf modules."""


class FTCError(Exception):
    """Base class for every error raised by ftcsurf."""


# meromorphic
class PoleEvaluation(FTCError, ZeroDivisionError):
    pass


class RootFindingFailure(FTCError):
    pass


class PoleOnPath(FTCError):
    pass


class QuadratureNonConvergence(FTCError):
    pass


# weierstrass
class InvalidSpinorialData(FTCError, ValueError):
    pass


class NonSquareDivisor(FTCError, ValueError):
    pass


class PeriodInconsistency(FTCError):
    pass


class JorgeMeeksViolation(FTCError):
    pass


# curves
class PointOnCurve(FTCError, ValueError):
    pass


class MethodDisagreement(FTCError):
    pass


class SingularityClassificationError(FTCError):
    """A singular point of a planar curve could not be put in cusp normal form."""


class OddOrderSingularity(SingularityClassificationError):
    pass


class NoRegularNormalField(FTCError):
    pass


# hitting
class RegionTooSmall(FTCError):
    pass


class FlatSurface(FTCError, ValueError):
    pass


class ParameterOutOfRange(FTCError, ValueError):
    pass


# interpolate
class DominanceFailure(FTCError):
    pass


class NewtonDivergence(FTCError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ImmersionLoss(FTCError):
    pass


class ContactOrderUnachieved(FTCError):
    pass
