"""Exception hierarchy shared by every module of the package."""


class AcsheetError(ValueError):
    """Base class for all package errors."""


class NonIntegralStepCount(AcsheetError):
    pass


class DegenerateGrid(AcsheetError):
    pass


class CellOutOfRange(AcsheetError, IndexError):
    pass


class NonIntegralShift(AcsheetError):
    pass


class NonpositiveTime(AcsheetError):
    pass


class ExponentOutOfRange(AcsheetError):
    pass


class StepMisalignment(AcsheetError):
    pass


class EnsembleTooSmall(AcsheetError):
    pass


class EvenDegree(AcsheetError):
    pass


class NonnegativeLeadingCoefficient(AcsheetError):
    pass


class StabilityGuardViolated(AcsheetError):
    pass


class TestFunctionBoundaryViolation(AcsheetError):
    __test__ = False  # keep pytest from collecting this as a test class


class GridMismatch(AcsheetError):
    pass


class UnboundedInitialSet(AcsheetError):
    pass


class BetaBelowThreshold(AcsheetError):
    pass


class DegeneratePair(AcsheetError):
    pass


class InsufficientSamples(AcsheetError):
    pass


class BoundaryConditionViolated(AcsheetError):
    pass


class ConfigInvalid(AcsheetError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
