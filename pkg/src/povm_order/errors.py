"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (CLI exit code 2),
numerical failures from :class:`SolverError` (CLI exit code 3).
"""


class PovmOrderError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PovmOrderError, ValueError):
    pass


class SolverError(PovmOrderError, RuntimeError):
    pass


class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotAState(ValidationError):
    pass


class DimNotSquare(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadParameter(ValidationError):
    pass


class BadBloch(BadParameter):
    pass


class DuplicateLabel(ValidationError):
    pass


class EffectNotPSD(ValidationError):
    def __init__(self, index: int, min_eigenvalue: float):
        self.index = index
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"effect {index} is not positive semidefinite "
            f"(min eigenvalue {min_eigenvalue:.3e})"
        )


class SumNotIdentity(ValidationError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"effects do not sum to the identity (residual {residual:.3e})")


class ZeroDenominator(PovmOrderError, ArithmeticError):
    """The normalising form vanishes on an effect; callers skip that term."""


class NoConvergence(SolverError):
    pass


class SolverStall(SolverError):
    pass
