"""Exception hierarchy shared across the package."""


class CurstatError(Exception):
    """Base class for all estimator and input errors."""


class InputError(CurstatError, ValueError):
    """Bad data or configuration; the CLI maps these to exit code 2."""


class EstimatorError(CurstatError, ArithmeticError):
    """Numerical failure of an estimator; the CLI maps these to exit code 3."""


class EmptySample(InputError):
    pass


class InvalidDatum(InputError):
    pass


class InvalidBandwidth(InputError):
    pass


class InvalidSubsample(InputError):
    pass


class DegenerateDiagram(EstimatorError):
    pass


class SingularDesign(EstimatorError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateWindow(EstimatorError):
    """Every bootstrap replicate had zero variance at grid point ``t``."""

    def __init__(self, t):
        super().__init__(f"all bootstrap replicates degenerate at t={t:.6g}")
        self.t = t


class UnstableFit(EstimatorError):
    pass
