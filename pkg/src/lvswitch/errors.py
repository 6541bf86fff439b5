"""Exception types raised across the package."""


class LVSwitchError(Exception):
    """Base class for all package errors."""


class InputError(LVSwitchError, ValueError):
    """Invalid user-supplied parameters or configuration."""


class NumericalError(LVSwitchError, ArithmeticError):
    """A numerical procedure failed to reach its target."""


class DegenerateEnvironment(InputError):
    pass


class NotFavorableToX(InputError):
    pass


class DegenerateResident(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class ConfigError(InputError):
    pass


class ToleranceUnreachable(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class BracketFailure(NumericalError):
    pass


class FrontierValue(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class NotASaddle(NumericalError):
    pass


class EmptyWindow(NumericalError):
    pass


class SingularIsoclines(NumericalError):
    pass


class ContinuationFailure(NumericalError):
    pass


class NonConvergentTrajectory(NumericalError):
    pass
