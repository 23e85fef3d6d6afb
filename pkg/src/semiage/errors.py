"""Exception hierarchy shared by all modules."""


class SemiAgeError(Exception):
    """Base class for every error raised by the package."""


class MonotonicityViolation(SemiAgeError):
    pass


class QuadratureFailure(SemiAgeError):
    pass


class EvaluationOverflow(SemiAgeError):
    """A survival value underflowed, so a ratio such as g/G is undefined."""


class InvalidGenerator(SemiAgeError):
    pass


class DegenerateGenerator(SemiAgeError):
    """The generator derivative vanishes where the Kendall formula needs it."""


class SectionInversionFailure(SemiAgeError):
    """Some section v -> C(u, v) is not strictly increasing."""


class NotPseudoArchimedean(SemiAgeError):
    def __init__(self, message, t_range=None):
        super().__init__(message)
        self.t_range = t_range


class GridMismatch(SemiAgeError):
    pass


class MissingDensity(SemiAgeError):
    pass


class NotACopula(SemiAgeError):
    pass


class RouteMismatch(SemiAgeError):
    """Two independent Kendall computation routes disagree."""


class SpecError(SemiAgeError, ValueError):
    """Malformed family key or model configuration."""
