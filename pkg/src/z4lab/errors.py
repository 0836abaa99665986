"""Exception hierarchy. Anything deriving from ``Z4Error`` is a domain error
(CLI exit status 1); ``ConfigError`` is a usage error (exit status 2)."""


class Z4Error(Exception):
    pass


class InvalidRegimeError(Z4Error):
    pass


class DegenerateCoefficientsError(Z4Error):
    pass


class OutsideWindowError(Z4Error):
    pass


class MuTooLargeError(Z4Error):
    pass


class WrongCaseError(Z4Error):
    pass


class PreconditionError(Z4Error):
    pass


class BracketError(Z4Error):
    pass


class DiscontinuityError(Z4Error):
    """Raised when the model map is evaluated on its discontinuity line Y=0."""


class SingularDerivativeError(Z4Error):
    pass


class IntegrationError(Z4Error):
    """Integration stopped early. ``t`` and ``state`` hold the last accepted point."""

    def __init__(self, message, t, state):
        super().__init__(message)
        self.t = t
        self.state = state


class StepLimitError(IntegrationError):
    pass


class StepUnderflowError(IntegrationError):
    pass


class ConfigError(Exception):
    pass
