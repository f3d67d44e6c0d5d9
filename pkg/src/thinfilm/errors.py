"""Exception hierarchy for the thin-film simulator."""


class ThinFilmError(Exception):
    """Base class for all errors raised by :mod:`thinfilm`."""


class NegativeHeight(ThinFilmError, ValueError):
    pass


class NonPositiveHeight(ThinFilmError, ValueError):
    pass


class LimitMobilityHasNoEpsilonEntropy(ThinFilmError, ValueError):
    pass


class NegativeInitialData(ThinFilmError, ValueError):
    pass


class InvalidHorizon(ThinFilmError, ValueError):
    pass


class NotAKnot(ThinFilmError, KeyError):
    pass


class InvalidBound(ThinFilmError, ValueError):
    pass


class StepFailure(ThinFilmError):
    """A single implicit substep could not be completed; the caller may retry with a smaller step."""


class NewtonDivergence(StepFailure):
    pass


class PositivityLoss(StepFailure):
    pass


class LinearSolveFailure(StepFailure):
    pass


class StepCollapse(ThinFilmError):
    pass


class PathGridMismatch(ThinFilmError, ValueError):
    pass


class InsufficientData(ThinFilmError, ValueError):
    pass


class EnergyUnderflow(ThinFilmError):
    def __init__(self, message, t_hit=None):
        super().__init__(message)
        self.t_hit = t_hit


class EnsembleFailure(ThinFilmError):
    pass


class ConfigError(ThinFilmError, ValueError):
    pass
