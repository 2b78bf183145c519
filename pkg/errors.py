"""
Error types raised by the simulator.
All derive from ValueError so plain `except ValueError` keeps working.
"""


class ShadowSimError(ValueError):
    """Base class; exit_code is what the cli returns for this failure"""
    exit_code = 1


class SchemaError(ShadowSimError):
    """Problem file does not match its scenario schema"""
    exit_code = 1

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ShapeError(ShadowSimError):
    exit_code = 1


class ConfigurationError(ShadowSimError):
    exit_code = 1


class VerificationError(ShadowSimError):
    exit_code = 2


class InvarianceViolationError(ShadowSimError):
    """Operator set is not closed under the dynamics (leakage above tolerance)"""
    exit_code = 3

    def __init__(self, message, leakage=None):
        self.leakage = leakage
        super().__init__(message)


class NonHermitianError(ShadowSimError):
    exit_code = 4

    def __init__(self, message, defect=None):
        self.defect = defect
        super().__init__(message)


class DegenerateStateError(ShadowSimError):
    """All expectations vanish, so no shadow state exists"""
    exit_code = 5


class CapacityError(ShadowSimError):
    exit_code = 6


class InternalConsistencyError(ShadowSimError):
    """An asserted structural bound did not hold"""
    exit_code = 7


class NotApplicableError(ShadowSimError):
    exit_code = 1
