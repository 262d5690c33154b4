"""Exception hierarchy shared across the package."""


class TransferSLError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TransferSLError, ValueError):
    pass


class PropagationOverflowError(TransferSLError, OverflowError):
    def __init__(self, lam):
        self.lam = lam
        super().__init__(f"non-finite state while integrating at lambda={lam!r}")


class PoleProximityError(TransferSLError):
    """Evaluation point sits on (or numerically at) an eigenvalue."""

    def __init__(self, lam, pole):
        self.lam = lam
        self.pole = pole
        z = complex(lam)
        shown = z.real if z.imag == 0 else z
        super().__init__(f"lambda={shown} is within tolerance of the pole at {complex(pole).real:.16g}")


class SimplicityViolatedError(TransferSLError):
    def __init__(self, lam):
        self.lam = lam
        super().__init__(f"eigenvalue simplicity violated near lambda={lam!r}")


class MissedRootError(TransferSLError):
    pass


class NotAnEigenvalueError(TransferSLError, ValueError):
    pass


class ConvergenceError(TransferSLError):
    pass


class InsufficientDataError(TransferSLError, ValueError):
    pass
